use std::path::Path;

use qoct_core::QoctError;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Process exit status for a validation failure.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit status for a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }

    /// Prefixes the message with `what`.
    pub fn context(self, what: &str) -> Self {
        match self {
            Self::Parse(m) => Self::Parse(format!("{what}: {m}")),
            Self::Validation(m) => Self::Validation(format!("{what}: {m}")),
            Self::Numerical(m) => Self::Numerical(format!("{what}: {m}")),
            io @ Self::Io { .. } => io,
        }
    }
}

impl From<QoctError> for CliError {
    fn from(e: QoctError) -> Self {
        if e.is_numerical() {
            Self::Numerical(e.to_string())
        } else {
            Self::Validation(e.to_string())
        }
    }
}
