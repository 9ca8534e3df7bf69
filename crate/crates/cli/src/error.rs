use boussinesq_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),

    #[error("cannot write results: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 0 success, 1 invalid config, 2 non-convergence, 3 insufficient resolution.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NonConvergence(_)) => 2,
            CliError::Core(Error::Resolution { .. }) => 3,
            _ => 1,
        }
    }
}
