use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("enumeration overflow: dimension {0} exceeds 62")]
    Overflow(usize),
    #[error("invalid route {route}: {reason}")]
    InvalidRoute { route: usize, reason: String },
    #[error("duplicate action at index {0}")]
    DuplicateAction(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical underflow: {0}")]
    Underflow(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate factorization: every component has zero mass")]
    DegenerateFactorization,
    #[error("unsupported action set: {0}")]
    UnsupportedActionSet(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
