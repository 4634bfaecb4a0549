//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinchemError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e} ({context})")]
    CflViolation { dt: f64, limit: f64, context: String },

    #[error("singular evaluation point: {0}")]
    Singularity(String),

    #[error("quadrature failed to converge: {context} (best error estimate {err_est:e})")]
    QuadratureNonConvergence { context: String, err_est: f64 },

    #[error("inadmissible exponents: {0}")]
    InadmissibleExponents(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KinchemError>;
