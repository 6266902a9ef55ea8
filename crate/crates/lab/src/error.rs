use std::io;
use std::path::PathBuf;

use mismatch_core::Error as CoreError;
use serde::Serialize;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const BUDGET: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn parse(what: impl Into<String>, message: impl ToString) -> LabError {
        LabError::Parse {
            what: what.into(),
            message: message.to_string(),
        }
    }

    /// Machine-readable error code for the diagnostic stream.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::Read { .. } => "ReadError",
            LabError::Parse { .. } => "ParseError",
            LabError::Usage(_) => "UsageError",
            LabError::Core(e) => e.code(),
            LabError::Write { .. } => "WriteError",
            LabError::Internal(_) => "InternalError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Read { .. } | LabError::Parse { .. } | LabError::Usage(_) => exit::PARSE,
            LabError::Core(e) => match e {
                CoreError::BudgetExceeded { .. } => exit::BUDGET,
                // malformed channel or shape: the input itself is unusable
                CoreError::DimensionMismatch(_)
                | CoreError::RowNotStochastic { .. }
                | CoreError::NegativeEntry { .. }
                | CoreError::ProbabilityAboveOne { .. }
                | CoreError::SymbolOutOfRange { .. } => exit::PARSE,
                _ => exit::VALIDATION,
            },
            LabError::Write { .. } | LabError::Internal(_) => exit::INTERNAL,
        }
    }

    /// One-line JSON record written to stderr on failure.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Diagnostic {
            error: self.code(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.code()))
    }
}
