use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inconsistent or invalid input data.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// A point or support lies outside the interval an operator is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A smooth profile is not resolved well enough for the derivatives a kernel needs.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The auxiliary field vanished where a ratio with it was requested.
    #[error("zero crossing of phi at sample {index} (t = {time})")]
    ZeroCrossing { index: usize, time: f64 },

    /// A geometric law with zero success probability has no finite mean.
    #[error("infinite expectation: per-step probability is zero")]
    InfiniteExpectation,

    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Whether the failure is numerical rather than a problem with the input description.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Resolution(_) | Error::ZeroCrossing { .. } | Error::InfiniteExpectation
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
