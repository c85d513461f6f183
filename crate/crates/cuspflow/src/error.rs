//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructor or configuration value violates an invariant.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The adaptive step controller could not meet the requested tolerance.
    #[error("step controller failed at t = {t:.6e} (h = {h:.3e}): {detail}")]
    StepFailure { t: f64, h: f64, detail: String },

    /// A geodesic failed to return to its entry level within the time budget.
    #[error("geodesic did not return to the entry level within t = {t_max:.6e}")]
    NonReturn { t_max: f64 },

    /// A computation needs more samples or data points than were supplied.
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    /// An ensemble or grid does not span the range a fit requires.
    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    /// An experiment configuration violates a structural requirement.
    #[error("configuration violation: {0}")]
    ConfigViolation(String),

    /// A quadrature failed to converge to the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Report files missing or unreadable.
    #[error("report error: {0}")]
    Report(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI contract: configuration problems exit 2,
    /// runtime/numerical problems exit 3 (acceptance failures exit 1 and are
    /// not errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::ConfigViolation(_) => 2,
            _ => 3,
        }
    }
}
