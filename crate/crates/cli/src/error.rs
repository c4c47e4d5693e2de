use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON in {}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("malformed CSV in {}: {reason}", path.display())]
    Csv { path: PathBuf, reason: String },
    #[error("invalid {field}: {reason}")]
    Field { field: &'static str, reason: String },
    #[error("invalid {field}: {source}")]
    Input { field: &'static str, source: evoquant_core::Error },
    #[error(transparent)]
    Core(#[from] evoquant_core::Error),
}

impl CliError {
    pub fn field(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Field { field, reason: reason.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) | CliError::Input { source: e, .. } if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
