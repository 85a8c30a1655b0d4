use thiserror::Error;

/// Errors raised by the quantile-flow library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 2 cells, got {0}")]
    GridTooSmall(usize),

    #[error("grid mismatch: {left} cells vs {right} cells")]
    GridMismatch { left: usize, right: usize },

    #[error("quantile level {0} is outside (0, 1)")]
    LevelOutOfRange(f64),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("vector is not monotone: drop of {drop:e} at index {index}")]
    NotMonotone { index: usize, drop: f64 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("cone invariance violated at step {step}: drop of {drop:e}")]
    ConeViolation { step: usize, drop: f64 },

    /// A time step failed; `partial` holds every state computed before it.
    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
        partial: Box<crate::flow::Trajectory>,
    },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
