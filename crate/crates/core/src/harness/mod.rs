//! Configuration, experiment orchestration and CSV reports behind the
//! `kbounds` binary.
//!
//! Every command is available as a library function returning an
//! [`Outcome`]; the binary only parses arguments and maps the outcome to
//! the process exit code.

mod commands;
mod config;
mod report;
mod run;

pub use commands::{
    cmd_approx, cmd_check, cmd_constants, cmd_crosscheck, cmd_solve, cmd_validate, read_envelope_inputs, Invocation,
    Outcome,
};
pub use config::{
    ApproxConfig, LyapunovConfig, McConfigBlock, OperatorConfig, OutputConfig, RunConfig, SolverConfig,
    ValidationConfig,
};
pub use report::{fmt_f64, Cell, Table};
pub use run::{
    approx, bump_functions, certify, constants_from, crosscheck, ols_slope, spatial_decay_slope, validate,
    weighted_sups, ApproxReport, ApproxRow, CeilingRow, Context, CrossReport, CrossRow, Mode, ValidationReport,
    ValidationRow, APPROX_TARGET, CEILING_SLACK, DECAY_FRACTION, EXPONENT_MARGIN, FISHER_SLACK,
};

use crate::error::Error;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    HypothesisFail = 2,
    NonFinite = 3,
    MissingArtifact = 4,
    ValidationFail = 5,
    CrossCheckFail = 6,
    ApproxFail = 7,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Exit code for an error that aborted a command. Rejected
    /// configurations count as hypothesis failures.
    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::NonFinite(_) | Error::Overflow(_) | Error::Blowup(_) | Error::Stability(_) | Error::Truncation(_) => {
                ExitCode::NonFinite
            }
            Error::MissingArtifact(_) | Error::Io(_) => ExitCode::MissingArtifact,
            Error::ConstraintViolation(_)
            | Error::Config(_)
            | Error::Domain(_)
            | Error::Window(_)
            | Error::NegativeRadicand(_) => ExitCode::HypothesisFail,
        }
    }
}

/// Worker count from `KBOUNDS_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("KBOUNDS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}
