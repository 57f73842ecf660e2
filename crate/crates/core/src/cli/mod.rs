//! Experiment harness: scenario files, geometry generators, the two studies,
//! and the CSV/JSON writers used by the `altproj` binary.

pub mod generate;
pub mod output;
pub mod scenario;
pub mod studies;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hilbert;
use crate::schedule::{self, DiagnoseOptions, Schedule, ScheduleDiagnostics};

pub use scenario::{execute, run_scenario, Scenario, ScenarioRun, SummaryRecord};
pub use studies::{overrelaxation_study, truncation_study, OverrelaxOptions, OverrelaxRow, RunVerdict, TruncationRow};

/// Environment variable overriding the relative rank tolerance.
pub const TOL_ENV: &str = "ALTPROJ_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Non-finite values map to the numerical-failure code; everything else a
/// user can trigger (bad files, bad arguments, inconsistent dimensions) is a
/// config error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Parses an `ALTPROJ_TOL` value, falling back to the default when unset.
pub fn parse_rank_tol(raw: Option<&str>) -> Result<f64> {
    let Some(raw) = raw else {
        return Ok(hilbert::DEFAULT_RANK_TOL);
    };
    match raw.trim().parse::<f64>() {
        Ok(t) if t > 0.0 && t < 1.0 => Ok(t),
        _ => Err(Error::Config(format!("{TOL_ENV} must be a number in (0, 1), got {raw:?}"))),
    }
}

pub fn rank_tol_from_env() -> Result<f64> {
    parse_rank_tol(std::env::var(TOL_ENV).ok().as_deref())
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let s: Schedule =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    s.validate()?;
    Ok(s)
}

/// Diagnoses the schedule stored at `path`, scaled by `mu`.
pub fn check_schedule(path: &Path, mu: f64, horizon: usize) -> Result<ScheduleDiagnostics> {
    let s = load_schedule(path)?;
    let opts = DiagnoseOptions {
        horizon,
        ..DiagnoseOptions::default()
    };
    schedule::diagnose(&s, mu, &opts).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::Config(msg),
        other => other,
    })
}
