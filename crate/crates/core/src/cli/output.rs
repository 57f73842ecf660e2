//! CSV and JSON writers. Floats use Rust's shortest round-trip formatting,
//! so identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::engine::{self, IterationTrace};
use crate::error::Result;

pub const TRACE_HEADER: [&str; 5] = ["n", "alpha_n", "error_norm", "residual_dW", "rho_alpha_n"];
pub const RATE_HEADER: [&str; 5] = ["window_start", "window_end", "empirical_rate", "max_rho", "theoretical_bound"];

/// Steps per row of the rate table.
pub const RATE_WINDOW: usize = 50;

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per recorded error norm. Row `n` holds `α_n` and `ρ_{α_n}` for the
/// step leaving `u_n`; the final row leaves them empty.
pub fn trace_rows(trace: &IterationTrace) -> Vec<[String; 5]> {
    (0..trace.error_norms.len())
        .map(|n| {
            [
                n.to_string(),
                fmt_opt(trace.alphas_used.get(n).copied()),
                trace.error_norms[n].to_string(),
                trace.residuals[n].to_string(),
                fmt_opt(trace.rhos.get(n).copied()),
            ]
        })
        .collect()
}

pub fn write_trace_csv(path: &Path, trace: &IterationTrace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for row in trace_rows(trace) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Consecutive windows of [`RATE_WINDOW`] steps with the fitted per-step
/// factor, the worst contraction factor used inside the window, and the bound.
pub fn rate_rows(trace: &IterationTrace, bound: Option<f64>) -> Vec<[String; 5]> {
    let steps = trace.steps();
    let mut rows = Vec::new();
    let mut start = 0;
    while start + RATE_WINDOW <= steps {
        let end = start + RATE_WINDOW;
        let window = &trace.error_norms[start..=end];
        let rate = engine::estimate_rate_from(window, RATE_WINDOW).ok();
        let max_rho = trace.rhos[start..end].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push([
            start.to_string(),
            end.to_string(),
            fmt_opt(rate),
            max_rho.to_string(),
            fmt_opt(bound),
        ]);
        start = end;
    }
    rows
}

pub fn write_rate_table(path: &Path, trace: &IterationTrace, bound: Option<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RATE_HEADER)?;
    for row in rate_rows(trace, bound) {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes any serializable table (a slice of flat records) as CSV.
pub fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}
