use thiserror::Error;

/// Errors produced by matrix construction, sketching and coreset builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix too large for dense eigensolve: dimension {dim} exceeds {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("coreset stream malformed at byte {offset}: {reason}")]
    Format { offset: usize, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: &'static str, left: impl ToString, right: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}
