//! Config-driven experiment runs on top of `iscc-core`: model validation
//! against Monte Carlo, class fitting, optimizer sweeps and single solves.
//!
//! Every command is a pure function of the config bytes and the seed list.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;
pub mod validate;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    /// Process exit code: 2 for config problems, 3 for failed validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::ValidationFailed(_) => 3,
            CliError::Io(_) | CliError::Run(_) => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
