use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("arm index {index} out of range for {len} arms")]
    ArmOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direction lies outside the span of the arm features (residual {residual:.3e})")]
    InfeasibleDirection { residual: f64 },

    #[error("no arm has a positive allocation ratio")]
    DegenerateRatio,

    #[error("direction set is empty")]
    EmptyDirections,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("instance construction failed: {0}")]
    Construction(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("table parse error: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
