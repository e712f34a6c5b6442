use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NicgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid transform: {0}")]
    InvalidTransform(String),

    /// The search stopped on a node or time limit before the question was settled.
    #[error("budget exhausted after {nodes} nodes; result is indeterminate")]
    BudgetExhausted { nodes: u64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = NicgError> = std::result::Result<T, E>;
