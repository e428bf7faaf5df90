use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AstError>;

#[derive(Debug, Error)]
pub enum AstError {
    #[error("empty seed path: no flight plan can be built")]
    EmptyPath,

    #[error("flight plan needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),

    #[error("state is already at maximum depth {0}")]
    DepthExceeded(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cross-entropy proposal collapsed: all likelihood-ratio weights vanished in iteration {0}")]
    ProposalCollapse(usize),

    #[error("route database is empty")]
    EmptyDatabase,

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl AstError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AstError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        AstError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
