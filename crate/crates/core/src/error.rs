use thiserror::Error;

/// Errors raised by the geometry, Gaussian, flow and rescaling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate element: {0}")]
    DegenerateElement(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid surface: {0}")]
    InvalidSurface(String),
    #[error("remesh failure: {0}")]
    RemeshFailure(String),
    #[error("non-positive scale: {0}")]
    NonpositiveScale(String),
    #[error("unsupported index: {0}")]
    UnsupportedIndex(String),
    #[error("optimizer diverged: {0}")]
    OptimizerDiverged(String),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("query out of range: {0}")]
    OutOfRange(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
