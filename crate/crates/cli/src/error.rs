use thiserror::Error;

use levy2_core::LevyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] LevyError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(LevyError::Config(_)) => crate::report::EXIT_USAGE,
            CliError::Core(LevyError::BudgetExceeded { .. }) => crate::report::EXIT_BUDGET,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}
