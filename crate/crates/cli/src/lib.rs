//! Library side of the `trs` command-line tool: config handling, run
//! orchestration, file output and the embedded self test.

// Validation comparisons are written negated (`!(x > 0.0)`) so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

use thiserror::Error;

/// CLI failure classes, mapped one-to-one onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl From<trs_core::Error> for CliError {
    fn from(e: trs_core::Error) -> Self {
        match e {
            trs_core::Error::NonConvergence { .. } => Self::Numeric(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}
