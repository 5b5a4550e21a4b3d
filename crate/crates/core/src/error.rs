use thiserror::Error;

/// Errors produced by the graph-sequence toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("retry budget of {budget} pairings exhausted")]
    BudgetExhausted { budget: usize },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph has no node colors")]
    MissingColors,

    #[error("graph has no node features")]
    MissingFeatures,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid token: {0}")]
    InvalidToken(String),

    #[error("pattern diameter {diameter} exceeds hop radius {k}")]
    PatternTooWide { diameter: usize, k: usize },

    #[error("position {pos} out of range 1..={len}")]
    OutOfRange { pos: usize, len: usize },

    #[error("malformed block structure: {0}")]
    MalformedBlocks(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
