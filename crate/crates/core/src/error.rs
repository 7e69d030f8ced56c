use std::io;

/// Error type shared by every module in this crate.
///
/// `Parse` and `ParseLine` report positions 1-based, matching what an editor
/// shows. `Internal` marks a broken invariant on our side, never bad input.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("parse error at line {line}: {msg}")]
    ParseLine { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn coverage(msg: impl Into<String>) -> Self {
        Error::Coverage(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
