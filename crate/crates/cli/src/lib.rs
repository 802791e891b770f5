//! Configuration, orchestration and output for the `qfocus` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod record;
pub mod run;

pub use config::RunConfig;
pub use error::CliError;
pub use record::{RunKind, RunRecord};
pub use run::{run, RunOutput};
