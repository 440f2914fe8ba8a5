use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file contents; `offset` is the byte position of the problem.
    #[error("format error at byte {offset}: {msg}")]
    Format { msg: String, offset: u64 },

    /// Invalid configuration or parameters (maps to exit code 2 in the CLI).
    #[error("configuration error: {0}")]
    Config(String),

    /// Inputs outside an operation's domain (dimension mismatch, non-finite
    /// values, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(msg: impl Into<String>, offset: u64) -> Self {
        Error::Format {
            msg: msg.into(),
            offset,
        }
    }
}
