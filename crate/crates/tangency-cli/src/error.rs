//! CLI error type with process exit codes.
//!
//! Exit codes: 2 for configuration and schema violations, 3 for numeric or
//! runtime failures, 4 for invariant violations under `check`.

use std::fmt;

use tangency_core::CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed config files, unknown keys (exit 2).
    Schema(String),
    /// Numeric failures and runtime errors (exit 3).
    Runtime(String),
    /// Invariant violations detected in check mode (exit 4).
    Check(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn schema(msg: impl Into<String>) -> Self {
        CliError::Schema(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_) | CoreError::Mismatch(_) | CoreError::Unsupported(_) => {
                CliError::Schema(e.to_string())
            }
            CoreError::ScheduleExhausted { .. }
            | CoreError::EmptyLattice
            | CoreError::Numeric(_) => CliError::Runtime(e.to_string()),
        }
    }
}
