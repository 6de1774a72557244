use thiserror::Error;

use crate::topology::RrhId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown RRH id {0}")]
    UnknownRrh(RrhId),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: expected {expected}x{expected}, got {got}x{got}")]
    Shape { expected: usize, got: usize },
    #[error("incomplete input: {0}")]
    IncompleteInput(String),
    #[error("problem size {n} exceeds the limit of {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("event sequencing error: {0}")]
    Sequencing(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
