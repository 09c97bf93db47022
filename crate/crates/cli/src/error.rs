//! CLI error type with the process exit-code mapping.

use thiserror::Error;
use txbeam_core::CoreError;

/// Failures of a CLI command, bucketed by exit code:
/// 1 validation, 2 solver failure, 3 guard refusal.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Guard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Guard(_) => 3,
        }
    }

    /// Wraps an error detected before any computation started.
    pub fn validation(err: impl std::fmt::Display) -> Self {
        CliError::Validation(err.to_string())
    }

    /// Wraps an error raised while solving or searching.
    pub fn compute(err: CoreError) -> Self {
        match err {
            CoreError::EnumerationGuard { .. } => CliError::Guard(err.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}
