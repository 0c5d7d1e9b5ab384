//! Command-line front end: denoising runs, synthetic rings, quality metrics
//! and multi-cell comparisons. Everything numeric is delegated to
//! `elastica_core`; this crate only resolves settings and moves files.

pub mod args;
pub mod commands;
pub mod config;

use std::fmt;
use std::process::ExitCode;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config entries or inconsistent inputs (exit 2).
    Config(String),
    /// Reading or writing files failed (exit 3).
    Io(String),
    /// A solver produced non-finite values (exit 4).
    Diverged(String),
}

impl CliError {
    pub const CONFIG_EXIT: u8 = 2;
    pub const IO_EXIT: u8 = 3;
    pub const DIVERGED_EXIT: u8 = 4;

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => Self::CONFIG_EXIT,
            CliError::Io(_) => Self::IO_EXIT,
            CliError::Diverged(_) => Self::DIVERGED_EXIT,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Diverged(m) => write!(f, "solver diverged: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<elastica_core::imgio::ImageError> for CliError {
    fn from(e: elastica_core::imgio::ImageError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<elastica_core::imgio::TraceError> for CliError {
    fn from(e: elastica_core::imgio::TraceError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<elastica_core::solvers::SolverError> for CliError {
    fn from(e: elastica_core::solvers::SolverError) -> Self {
        use elastica_core::solvers::SolverError;
        match e {
            SolverError::Diverged { .. } => CliError::Diverged(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Six significant digits; `inf`/`-inf`/`nan` for non-finite values.
pub fn sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.00000".into();
    }
    // Take the exponent after rounding to six digits so carries such as
    // 9.999996 -> 10.0000 land in the right branch.
    let sci = format!("{v:.5e}");
    let exponent: i32 = sci[sci.find('e').expect("exponent marker") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..6).contains(&exponent) {
        let decimals = (5 - exponent) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}
