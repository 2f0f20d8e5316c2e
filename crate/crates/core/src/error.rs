use thiserror::Error;

/// Errors raised by the library. Each variant maps to a distinct CLI exit path.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller supplied a malformed argument (bit string, index, probability).
    #[error("invalid input: {0}")]
    Input(String),
    /// A configuration violates a documented invariant.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A special function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Reading a config or writing results failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
