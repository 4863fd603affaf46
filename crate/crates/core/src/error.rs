use thiserror::Error;

/// Errors raised by the simulation engine.
///
/// The three variants mirror the CLI exit-code classes: caller mistakes,
/// size limits, and protocol rule violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource error: {0}")]
    Resource(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
