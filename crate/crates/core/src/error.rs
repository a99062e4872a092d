use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse action set: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An action set or action violates one of its invariants.
    #[error("{}", match .action {
        Some(id) => format!("action {id}: {}", .message),
        None => .message.clone(),
    })]
    Validation { action: Option<String>, message: String },

    /// A caller-supplied argument is outside the operation's domain.
    #[error("{0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The configuration is well-formed but leaves nothing to work with.
    #[error("{0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn validation(action: Option<&str>, message: impl Into<String>) -> Self {
        Error::Validation {
            action: action.map(str::to_owned),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
