use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical precondition violated: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
