use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the analysis routines and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    /// A factor or matrix fell below the full-rank threshold.
    #[error("rank deficient {what}: smallest value {smallest:e} is below threshold {threshold:e}")]
    RankDeficient {
        what: &'static str,
        smallest: f64,
        threshold: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "cannot reach target density {target} on the intercept bracket \
         (densities span [{low}, {high}])"
    )]
    Calibration { target: f64, low: f64, high: f64 },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } => 1,
            Error::RankDeficient { .. } | Error::Numerical(_) | Error::Calibration { .. } => 2,
            Error::Io { .. } | Error::Parse { .. } => 3,
        }
    }
}
