//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violated a structural invariant (odd/bounded direction
    /// numbers, table grammar, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An index addressed a dimension or slot that does not exist.
    #[error("index out of range: {0}")]
    Index(String),

    /// A method/product/parameter combination that the engine cannot run.
    #[error("configuration error: {0}")]
    Config(String),

    /// A simulated path produced a non-finite value; the run is aborted
    /// rather than silently dropping the path.
    #[error("path rejected: non-finite value in run {run}, path {path}")]
    PathRejected { run: usize, path: usize },

    /// Aggregation was asked for error bars with fewer than two runs.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
