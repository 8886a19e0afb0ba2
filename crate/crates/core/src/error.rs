use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("instance too large for exhaustive search: {count} candidates exceed cap {cap}")]
    InstanceTooLarge { count: u128, cap: u128 },

    #[error("bisection did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(
        "client region is empty: radius {radius} leaves no interior in a {width} x {height} window"
    )]
    EmptyMargin {
        radius: f64,
        width: f64,
        height: f64,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_)
            | Error::InstanceTooLarge { .. }
            | Error::NonConvergence { .. } => 3,
            Error::Io { .. } | Error::Parse { .. } | Error::Csv(_) => 4,
            _ => 2,
        }
    }
}
