use std::path::Path;

use eosample_core::evaluate::EvaluateError;
use thiserror::Error;

/// Failure of a command, classified by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or invalid input data, or failed output writes. Exit code 3.
    #[error("{0}")]
    Data(String),
    /// Every configuration was flagged. Exit code 4.
    #[error("{0}")]
    NoResults(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NoResults(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<EvaluateError> for CliError {
    fn from(e: EvaluateError) -> Self {
        match e {
            EvaluateError::AllFlagged => CliError::NoResults(e.to_string()),
            EvaluateError::NoSatellites(_) | EvaluateError::DuplicateId(_) | EvaluateError::Orbit(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<crate::nrg::NrgError> for CliError {
    fn from(e: crate::nrg::NrgError) -> Self {
        CliError::Data(e.to_string())
    }
}
