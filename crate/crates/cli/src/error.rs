use std::path::PathBuf;

use qsum_core::Violation;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid scenario:{}", list(.0))]
    Invalid(Vec<Violation>),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qsum_core::Error),
}

impl CliError {
    /// Process exit status: 2 for input problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid(_) | CliError::Usage(_) => 2,
            CliError::Core(qsum_core::Error::Validation(_) | qsum_core::Error::InvalidConfig { .. }) => 2,
            CliError::Core(qsum_core::Error::UnknownScenario(_)) => 2,
            _ => 1,
        }
    }
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("\n  {x}")).collect()
}
