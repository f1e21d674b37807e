//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario file could not be read from disk.
    #[error("cannot read scenario file `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A scenario file is not valid TOML.
    #[error("scenario parse error: {0}")]
    Parse(String),

    /// A scenario parsed fine but one of its fields is out of range or the
    /// fields are mutually inconsistent.  The message names the offending
    /// field.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A numeric argument to a library routine is out of its domain
    /// (negative power, empty tap list, mismatched lengths, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An index (element, cluster, ray, table, column) is out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Writing results to disk failed.
    #[error("cannot write `{path}`: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Build an [`Error::InvalidScenario`] from anything printable.
    pub fn scenario(msg: impl Into<String>) -> Self {
        Error::InvalidScenario(msg.into())
    }

    /// Build an [`Error::InvalidArgument`] from anything printable.
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
