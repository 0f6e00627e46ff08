use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed probability data or channel tables.
    #[error("validation error: {0}")]
    Validation(String),
    /// An argument is inconsistent with the object it is applied to.
    #[error("usage error: {0}")]
    Usage(String),
    /// A table or enumeration would exceed the desk-scale cap.
    #[error("capacity exceeded: {what} needs {needed} cells, cap is {cap}")]
    Capacity { what: String, needed: f64, cap: f64 },
    /// The channel file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
