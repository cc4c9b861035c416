//! Library side of the `biotstab` binary: configuration parsing and the
//! `run`, `sweep` and `verify` commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use commands::{cmd_run, cmd_sweep, cmd_verify, RunOutcome};
pub use config::{load_config, parse_config, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] biotstab::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }
}

/// Process exit status for a successful or converged run.
pub const EXIT_OK: i32 = 0;
/// Usage, configuration, I/O and solver setup errors.
pub const EXIT_USAGE: i32 = 1;
/// The coupled iteration diverged or did not converge; for `sweep`, every
/// cell failed; for `verify`, a check failed.
pub const EXIT_FAILED: i32 = 2;
