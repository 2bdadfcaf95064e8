//! Error type shared by every module in the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure categories surfaced by the toolkit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Tensor/image shapes do not line up.
    Dim(String),
    /// Non-finite values, degenerate denominators, diverging losses.
    Numeric(String),
    /// An invalid hyperparameter or option value.
    Config(String),
    /// API misuse, e.g. backward on a non-scalar node.
    Contract(String),
    /// Bad input data (malformed manifest rows, missing labels, k > M).
    Data(String),
}

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::Dim(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dim(m) => write!(f, "dimension error: {m}"),
            Error::Numeric(m) => write!(f, "numeric error: {m}"),
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Contract(m) => write!(f, "contract error: {m}"),
            Error::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
