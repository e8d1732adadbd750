//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine failed to converge or produced an unusable value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An operation was refused to guard against a runaway computation
    /// (e.g. exhaustive BFS or full-graph sampling above the configured cap).
    #[error("refused: {0}")]
    Refused(String),

    /// The selected algorithm does not match the model's criticality regime.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// Configuration file could not be read or parsed.
    #[error("config error ({path}): {message}")]
    Config { path: String, message: String },

    #[error("i/o error ({path}): {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
