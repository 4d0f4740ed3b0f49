//! Batch experiment runner binding the optimal-measure library to JSON
//! configs, with reproducible file outputs.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod util;

use optmeas::Error as LibError;

/// Exit-code contract: 0 success, 1 soft failure with artifacts still
/// written, 2 usage or config error, 3 infeasible problem.
#[derive(Debug)]
pub enum RunError {
    /// Artifacts were produced but a contract failed (non-convergence,
    /// sandwich violation, failed invariants).
    Soft(String),
    Usage(String),
    Infeasible(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Soft(_) => 1,
            RunError::Usage(_) => 2,
            RunError::Infeasible(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Soft(m) | RunError::Usage(m) | RunError::Infeasible(m) => m,
        }
    }
}

impl From<LibError> for RunError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::Admissibility(_)
            | LibError::ScaleGuard { .. }
            | LibError::BasisTooLarge { .. }
            | LibError::DegenerateFamily
            | LibError::DegenerateMeasure { .. } => RunError::Infeasible(e.to_string()),
            other => RunError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Usage(format!("io error: {e}"))
    }
}
