use std::fmt;

use mimo_capacity::Error as EngineError;

use crate::corrmat::ParseError;

/// Exit codes: 2 usage or invalid input, 3 numerical degeneracy, 4 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Engine(EngineError),
    Parse { path: String, source: ParseError },
    Io { path: String, source: std::io::Error },
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Engine(e) => match e {
                EngineError::Degenerate { .. }
                | EngineError::NotPositiveDefinite { .. }
                | EngineError::NoConvergence(_)
                | EngineError::Truncation { .. }
                | EngineError::Bracketing { .. }
                | EngineError::Internal(_) => 3,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Output(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Parse { path, source } => write!(f, "{path}: {source}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Output(m) => write!(f, "output: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        CliError::Engine(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
