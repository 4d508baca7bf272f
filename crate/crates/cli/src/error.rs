//! Errors of the study runners and their process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("numerical error: {0}")]
    Core(#[from] sdnlw_core::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Exit code of a run that completed all replicas with every trend check
/// passing.
pub const EXIT_OK: i32 = 0;
/// A required trend check failed.
pub const EXIT_ASSERTION: i32 = 2;
/// More replicas blew up than the budget allows at some truncation level.
pub const EXIT_BLOWUP: i32 = 3;
/// The configuration was rejected.
pub const EXIT_CONFIG: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(sdnlw_core::Error::InvalidConfig(_)) => EXIT_CONFIG,
            _ => 1,
        }
    }
}
