use thiserror::Error;

/// Errors raised by the depth toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time domain [{t1}, {t2}]: need finite t1 < t2")]
    InvalidDomain { t1: f64, t2: f64 },

    #[error("invalid realization: {0}")]
    InvalidRealization(String),

    #[error("invalid inter-event times: {0}")]
    InvalidIet(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("rate must be positive and finite, got {0}")]
    InvalidRate(f64),

    #[error("invalid intensity: {0}")]
    InvalidIntensity(String),

    #[error("invalid warp function: {0}")]
    InvalidWarp(String),

    #[error("time domains do not match")]
    DomainMismatch,

    #[error("count {count} exceeds cardinality cap {cap}")]
    CapExceeded { count: usize, cap: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("conditional means for cardinality {k} are not strictly increasing")]
    NonMonotoneMeans { k: usize },

    #[error("cannot pad to {k} events: pooled event list is empty")]
    PoolEmpty { k: usize },

    #[error("no conditional row for cardinality {0}")]
    MissingCardinality(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("realization has no events")]
    EmptyRealization,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed model document: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
