use std::path::PathBuf;

use necrostrip_core::{Error as CoreError, ErrorKind};
use thiserror::Error;

/// Exit status of the `necrostrip` binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Io = 1,
    Validation = 2,
    Numerical = 3,
    ModelRegime = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(String),

    #[error("invalid override `{raw}`: {reason}")]
    Override { raw: String, reason: String },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Failed {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn status(&self) -> ExitStatus {
        let kind = match self {
            CliError::Core(e) | CliError::Failed { source: e, .. } => e.kind(),
            CliError::Write { .. } => return ExitStatus::Io,
            _ => return ExitStatus::Validation,
        };
        match kind {
            ErrorKind::Validation => ExitStatus::Validation,
            ErrorKind::Numerical => ExitStatus::Numerical,
            ErrorKind::ModelRegime => ExitStatus::ModelRegime,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
