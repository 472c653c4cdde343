use std::io;

/// Errors reported by samplers, combinatorial routines and parsers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An index, rank or coordinate is out of range.
    #[error("range error: {0}")]
    Range(String),
    /// Exact integer arithmetic would overflow its 128-bit range.
    #[error("overflow: {0}")]
    Overflow(String),
    /// The requested object is too large for the supported index width.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// The caller broke a precondition, e.g. advancing an exhausted sequence.
    #[error("contract violation: {0}")]
    Contract(String),
    /// The model parameters do not define valid probabilities.
    #[error("invalid model: {0}")]
    Model(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
