use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
    #[error("{path}: {count} malformed row(s), first at line {first_line}: {first_reason}")]
    Malformed {
        path: PathBuf,
        count: usize,
        first_line: usize,
        first_reason: String,
    },
    #[error(transparent)]
    Core(#[from] h3_core::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Machine-readable form of an error, printed to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Data { .. } | CliError::Malformed { .. } => "data",
            CliError::Core(e) if e.is_degenerate() => "degenerate_task",
            CliError::Core(h3_core::Error::InvalidParameter { .. }) => "usage",
            CliError::Core(_) => "data",
            CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// 1 usage, 2 data, 3 degenerate task.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => 1,
            "degenerate_task" => 3,
            _ => 2,
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}
