use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A numeric parameter lies outside the domain where the quantity exists.
    #[error("domain error: {0}")]
    Domain(String),

    /// The request exceeds a size guard (dimension, subset count, edge count).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// An experiment configuration failed validation.
    #[error("invalid config ({}): {message}", keys.join(", "))]
    Config { keys: Vec<String>, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub(crate) fn config(key: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            keys: vec![key.to_string()],
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 1 for bad input or config, 2 for
    /// capacity, I/O and other internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Domain(_) | Error::Config { .. } | Error::Parse { .. } => 1,
            Error::Capacity(_) | Error::Io { .. } => 2,
        }
    }
}
