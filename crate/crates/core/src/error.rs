use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the optimizer, benchmark, statistics and smoothing code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite weight {value} for history entry {index}")]
    NonFiniteWeight { index: usize, value: f64 },

    #[error("reprojection direction is degenerate (centers coincide)")]
    DegenerateDirection,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point lies outside the search box at coordinate {index}: {value} not in [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unknown function id `{0}`")]
    UnknownFunction(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
