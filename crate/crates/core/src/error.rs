use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ShamError>;

#[derive(Debug, Error)]
pub enum ShamError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A gradient, constraint value or iterate became non-finite.
    #[error("numerical failure at iteration {k}: {quantity} is not finite")]
    NumericalFailure { k: usize, quantity: String },

    #[error("averaged iterate not ready: {0}")]
    NotReady(String),

    #[error("unsupported dimension {0} (grid oracle handles n <= 3)")]
    UnsupportedDimension(usize),

    #[error("no feasible grid point")]
    InfeasibleGrid,

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("degenerate constant: {0}")]
    DegenerateConstant(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl ShamError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ShamError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        ShamError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(ShamError::DimensionMismatch { expected, actual })
    }
}
