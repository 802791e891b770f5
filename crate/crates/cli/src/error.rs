use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Core(#[from] qfocus_core::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub(crate) fn missing(field: &str, message: &str) -> Self {
        CliError::Config {
            field: field.into(),
            message: format!("section required by this subcommand; {message}"),
        }
    }

    /// 2 for input problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) => 2,
            CliError::Output(_) => 1,
        }
    }
}
