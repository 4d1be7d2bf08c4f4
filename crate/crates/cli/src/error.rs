use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] twodsd::Error),
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Machine-readable category reported on stderr.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "io_read",
            CliError::Write { .. } => "io_write",
            CliError::Input { .. } => "input",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.category(),
        }
    }

    /// Process exit code: 2 usage, 3 input or I/O, 4 invalid parameters,
    /// 5 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Read { .. } | CliError::Write { .. } | CliError::Input { .. } => 3,
            CliError::Core(e) => match e {
                twodsd::Error::EmptySample | twodsd::Error::InvalidSample(_) | twodsd::Error::Precondition { .. } => 3,
                twodsd::Error::InvalidEpsilon(_)
                | twodsd::Error::InvalidProbability(_)
                | twodsd::Error::InvalidParameter(_)
                | twodsd::Error::UnsupportedCombination(_)
                | twodsd::Error::InvalidEnlargement(_) => 4,
                _ => 5,
            },
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            schema_version: crate::output::SCHEMA_VERSION,
            error: ErrorBody {
                category: self.category(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub schema_version: &'static str,
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub category: &'static str,
    pub message: String,
    pub exit_code: i32,
}
