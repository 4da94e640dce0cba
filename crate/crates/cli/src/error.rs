//! CLI error classification and exit codes.

use std::process::ExitCode;

/// Exit codes: 2 usage, 3 validation, 4 I/O (0 is success).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Validation(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(4),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<phasesep::Error> for CliError {
    fn from(err: phasesep::Error) -> Self {
        match err {
            phasesep::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
