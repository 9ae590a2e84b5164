use std::fmt;

use olu::OluError;

pub type CliResult<T> = Result<T, CliError>;

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags or config file. Exit 2.
    Config(String),
    /// A verification or acceptance check failed. Exit 3.
    Criterion(String),
    /// Reading or writing an artifact failed. Exit 4.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Criterion(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Criterion(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<OluError> for CliError {
    fn from(e: OluError) -> Self {
        match e {
            OluError::CheckFailed(m) => CliError::Criterion(m),
            OluError::Io(_) | OluError::Csv(_) | OluError::Json(_) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
