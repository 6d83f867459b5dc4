//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by failure class so callers (notably the CLI) can
/// map them to distinct exit codes: file/format problems, numeric problems,
/// and invalid arguments.
#[derive(Debug, Error)]
pub enum Error {
    /// A tensor or layer received data of the wrong shape.
    #[error("{context}: shape mismatch, expected {expected}, got {actual}")]
    ShapeMismatch {
        context: String,
        expected: String,
        actual: String,
    },

    /// An operation was called with arguments outside its domain.
    #[error("{context}: {message}")]
    InvalidArgument { context: String, message: String },

    /// A NaN or infinity appeared where only finite values are allowed.
    #[error("non-finite value in {what}")]
    NonFinite { what: String },

    /// A container file is malformed (bad magic, truncated, inconsistent sizes).
    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::format("csv", e.to_string())
    }
}

impl Error {
    pub fn shape(context: impl Into<String>, expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::ShapeMismatch {
            context: context.into(),
            expected: expected.into(),
            actual: actual.into(),
        }
    }

    pub fn invalid(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
