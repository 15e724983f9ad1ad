use std::path::PathBuf;

use thiserror::Error;

use crate::commands::{EXIT_INVALID, EXIT_IO, EXIT_RUNTIME};
use crate::report::Issue;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("invalid model: {message}")]
    Invalid { message: String, issues: Vec<Issue> },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Usage(_) => EXIT_IO,
            CliError::Invalid { .. } => EXIT_INVALID,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}
