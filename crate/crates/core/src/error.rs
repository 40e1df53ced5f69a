//! Error type shared by all engine modules.

use thiserror::Error;

/// Errors produced by the pansharpening engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates an operation's contract (bad dimensions,
    /// out-of-range values, inapplicable method/correction pairs, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input data is structurally valid but unusable for the requested
    /// operation (constant band where variance is required, all spectral
    /// vectors degenerate, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed text content (sensor profile files, fixture records).
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn invalid_input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
