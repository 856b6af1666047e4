//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors produced by constructors and estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// A parameter is outside its admissible range.
    InvalidParameter(String),
    /// The gap schedule leaves no room at the requested depth (`r_N <= 0`).
    ScheduleExhausted { depth: usize },
    /// No root cube of side `delta` fits inside the domain.
    EmptyLattice,
    /// Two objects with incompatible dimensions or scaffolds were combined.
    Mismatch(String),
    /// An operation is not available for this variant (wrong regime, missing
    /// evaluator, unsupported dimension).
    Unsupported(String),
    /// A numeric computation failed (non-finite value, degenerate fit).
    Numeric(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            CoreError::ScheduleExhausted { depth } => {
                write!(
                    f,
                    "schedule exhausted: side length non-positive at depth {depth}"
                )
            }
            CoreError::EmptyLattice => write!(f, "empty root lattice: delta too large for domain"),
            CoreError::Mismatch(msg) => write!(f, "mismatch: {msg}"),
            CoreError::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            CoreError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

impl CoreError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::InvalidParameter(msg.into())
    }
}
