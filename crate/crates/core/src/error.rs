use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature index {index} exceeds model dimension {dimension}")]
    DimensionMismatch { index: usize, dimension: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("instance of size {size} exceeds enumeration limit {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
