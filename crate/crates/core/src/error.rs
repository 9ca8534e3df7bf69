use thiserror::Error;

use crate::duhamel::PicardHistory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input arrays or fields do not match the expected layout.
    #[error("input shape mismatch: {0}")]
    Shape(String),

    /// A grid specification violates one of its invariants.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A parameter lies outside the hypotheses of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A ratio was requested whose denominator vanishes.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    /// The lattice is too small or too coarse for the requested object.
    #[error("insufficient resolution: {message} (required grid: tau_max {required_tau_max}, num_modes {required_modes})")]
    Resolution {
        message: String,
        required_tau_max: f64,
        required_modes: usize,
    },

    /// Picard iteration failed to contract within the iteration budget.
    #[error("Picard iteration did not converge after {} iterations (last increment {:.3e})", .0.increments.len(), .0.last_increment())]
    NonConvergence(PicardHistory),
}

impl Error {
    pub(crate) fn resolution(message: impl Into<String>, tau_max: f64, modes: usize) -> Self {
        Error::Resolution {
            message: message.into(),
            required_tau_max: tau_max,
            required_modes: modes,
        }
    }
}
