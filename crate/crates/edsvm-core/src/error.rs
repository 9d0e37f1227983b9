use thiserror::Error;

/// Errors raised by dataset construction, kernel evaluation, and model fits.
#[derive(Debug, Error)]
pub enum EdsvmError {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("model is not fitted or incompatible: {0}")]
    ModelState(String),
}
