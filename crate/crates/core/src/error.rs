use thiserror::Error;

/// Errors raised by state construction, channel algebra, optimizers and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("total dimension {requested} exceeds the configured maximum {max}")]
    Capacity { requested: usize, max: usize },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("branch probability {0:e} is below the degenerate-branch threshold")]
    DegenerateBranch(f64),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("estimator undefined: probe carries no coherence (a = 0)")]
    EstimatorUndefined,

    #[error("bound ordering violated: lower bound {lower} exceeds upper bound {upper}")]
    BoundViolation { lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
