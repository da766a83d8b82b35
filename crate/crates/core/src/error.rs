use thiserror::Error;

/// Errors raised by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("structural: {0}")]
    Structural(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
