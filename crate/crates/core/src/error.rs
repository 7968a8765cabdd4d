use thiserror::Error;

/// Error type shared by every module of the crate.
///
/// The variants map onto the three failure classes the command line
/// distinguishes: a violated precondition (bad argument or horizon), a
/// malformed input, and a resource limit.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A caller-supplied argument is outside the operation's domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The sequence is too short for the requested evaluation.
    #[error("horizon too short: need at least {required} bits, have {available}")]
    Horizon { required: u64, available: u64 },
    /// Malformed input data. `offset` is a byte/character position when known.
    #[error("data error{}: {message}", .offset.map(|o| format!(" at offset {o}")).unwrap_or_default())]
    Data { offset: Option<u64>, message: String },
    /// A configured resource ceiling would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::Data { offset: None, message: message.into() }
    }

    pub(crate) fn data_at(offset: u64, message: impl Into<String>) -> Self {
        Error::Data { offset: Some(offset), message: message.into() }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
