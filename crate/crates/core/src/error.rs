//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("shell is not watertight: edge ({0}, {1}) is open")]
    OpenEdge(usize, usize),

    #[error("contact feasibility violated: {0}")]
    FeasibilityViolation(String),

    #[error("solver aborted at step {step}: {reason}")]
    SolverAbort { step: usize, reason: String },

    #[error("rigid script discontinuous at frame {frame}: {reason}")]
    DiscontinuousScript { frame: usize, reason: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
