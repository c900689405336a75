//! Verification suites for `sflab-core` and the plumbing behind the `lab`
//! binary: configuration, JSON reports and CSV traces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod suites;
pub mod trace;

use std::path::PathBuf;

pub use config::{SuiteConfig, SuiteName};
pub use report::{Check, Param, Report};
pub use suites::{run_suite, SuiteOutput};
pub use trace::write_trace;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Compute(#[from] sflab_core::Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 1 when a computation failed.
    pub fn exit_code(&self) -> i32 {
        use sflab_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Compute(E::InvalidParameter(_) | E::DimensionMismatch { .. }) => 2,
            CliError::Compute(_) | CliError::Report(_) => 1,
        }
    }
}
