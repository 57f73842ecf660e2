//! Scenario files: a JSON description of one experiment, and the pipeline
//! that turns it into a trace, a summary and optional output files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate;
use super::output;
use crate::engine::{self, IterationTrace, Problem, RateBound, RunOptions, StopReason};
use crate::error::{Error, Result};
use crate::hilbert::{self, Vector};
use crate::schedule::{self, DiagnoseOptions, Schedule, Verdict};
use crate::subspace::{AffineSubspace, ProblemGeometry};

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    /// Free text; bundled scenarios record where their numbers come from.
    #[serde(default)]
    pub comment: String,
    pub geometry: GeometrySpec,
    pub schedule: Schedule,
    pub u0: StartSpec,
    pub max_iters: usize,
    pub conv_tol: f64,
    #[serde(default = "default_true")]
    pub stall_detection: bool,
    #[serde(default)]
    pub outputs: Vec<OutputKind>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    /// Spanning vectors (as lists of coordinates) plus a point for each space.
    Explicit {
        u_span: Vec<Vec<f64>>,
        u_point: Vec<f64>,
        w_span: Vec<Vec<f64>>,
        w_point: Vec<f64>,
    },
    Random {
        dim: usize,
        dim_u: usize,
        dim_w: usize,
        seed: u64,
    },
    ControlledAngle {
        angles_deg: Vec<f64>,
        offset_norm: f64,
        /// Optional random rigid rotation applied afterwards.
        #[serde(default)]
        rotation_seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSpec {
    Zero,
    Explicit { value: Vec<f64> },
    /// Gaussian coordinates along an orthonormal basis of `U`, placed on `U`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    TraceCsv,
    SummaryJson,
    RateTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub nu: f64,
    pub gamma: f64,
    pub norm_q: f64,
    pub gamma_q: f64,
    pub intersection_dim: usize,
    /// `d(limit, W)`, the distance between the two subspaces.
    pub residual_at_limit: f64,
    pub stop_reason: StopReason,
    pub iters: usize,
    pub initial_error: f64,
    pub final_error: f64,
    pub empirical_rate: Option<f64>,
    /// Per-step rate bound, when its hypotheses hold over the steps taken.
    pub theoretical_bound: Option<f64>,
    pub schedule_verdict: Verdict,
    pub u0_projected: bool,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        if self.version != SCENARIO_VERSION {
            return Err(Error::Config(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        if !(self.conv_tol.is_finite() && self.conv_tol >= 0.0) {
            return Err(Error::Config(format!("conv_tol must be finite and >= 0, got {}", self.conv_tol)));
        }
        self.schedule.validate()
    }

    pub fn build_geometry(&self, rank_tol: f64) -> Result<ProblemGeometry> {
        let g = match &self.geometry {
            GeometrySpec::Explicit {
                u_span,
                u_point,
                w_span,
                w_point,
            } => {
                let d = u_point.len();
                let space = |span: &[Vec<f64>], point: &[f64]| -> Result<AffineSubspace> {
                    let m = hilbert::from_columns(d, span)?;
                    AffineSubspace::new(&m, &Vector::from_column_slice(point), rank_tol)
                };
                ProblemGeometry::new(space(u_span, u_point)?, space(w_span, w_point)?)?
            }
            GeometrySpec::Random { dim, dim_u, dim_w, seed } => {
                generate::random_geometry(*dim, *dim_u, *dim_w, *seed, rank_tol)?
            }
            GeometrySpec::ControlledAngle {
                angles_deg,
                offset_norm,
                rotation_seed,
            } => {
                let g = generate::controlled_angle_deg(angles_deg, *offset_norm)?;
                match rotation_seed {
                    Some(seed) => generate::rotate(&g, &generate::random_rotation(g.ambient_dim(), *seed)?)?,
                    None => g,
                }
            }
        };
        Ok(g)
    }

    /// Starting point in the original coordinates of `g`.
    pub fn start_point(&self, g: &ProblemGeometry) -> Result<Vector> {
        let d = g.ambient_dim();
        match &self.u0 {
            StartSpec::Zero => Ok(Vector::zeros(d)),
            StartSpec::Explicit { value } => {
                if value.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: value.len(),
                    });
                }
                Ok(Vector::from_column_slice(value))
            }
            StartSpec::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u = g.u_space();
                let coords = generate::gaussian_vector(&mut rng, u.dim());
                Ok(u.offset() + u.basis() * coords)
            }
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            stall_window: if self.stall_detection { RunOptions::default().stall_window } else { None },
            ..RunOptions::with_limits(self.max_iters, self.conv_tol)
        }
    }
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub problem: Problem,
    pub trace: IterationTrace,
    pub summary: SummaryRecord,
    pub rate_bound: Option<RateBound>,
}

/// Runs the full pipeline: geometry, canonicalization, angles, operator,
/// schedule diagnostics, iteration and summary.
pub fn execute(scenario: &Scenario, rank_tol: f64) -> Result<ScenarioRun> {
    let g = scenario.build_geometry(rank_tol)?;
    let start = scenario.start_point(&g)?;
    let problem = Problem::new(&g, hilbert::DEFAULT_INTERSECTION_TOL)?;
    let u0 = &start - problem.geometry.translation();

    let trace = engine::run_alternating(&problem, &scenario.schedule, &u0, &scenario.run_options())?;
    let q = &problem.projector;
    let nu = problem.angles.nu;
    let diag_opts = DiagnoseOptions {
        horizon: scenario.max_iters.max(1),
        ..DiagnoseOptions::default()
    };
    let mu = if nu > 0.0 { nu * nu } else { 1.0 };
    let diagnostics = schedule::diagnose(&scenario.schedule, mu, &diag_opts)?;
    let rate_bound = RateBound::for_alphas(q, nu, problem.angles.gamma, &trace.alphas_used);

    let summary = SummaryRecord {
        nu,
        gamma: problem.angles.gamma,
        norm_q: q.norm(),
        gamma_q: q.reduced_min_modulus(),
        intersection_dim: problem.angles.intersection_dim,
        residual_at_limit: q.residual(problem.w(), &trace.limit)?,
        stop_reason: trace.stop_reason,
        iters: trace.steps(),
        initial_error: trace.error_norms[0],
        final_error: trace.final_error(),
        empirical_rate: trace.estimated_rate,
        theoretical_bound: rate_bound.as_ref().map(|b| b.bound),
        schedule_verdict: diagnostics.verdict,
        u0_projected: trace.u0_projected,
    };
    Ok(ScenarioRun {
        problem,
        trace,
        summary,
        rate_bound,
    })
}

/// Loads, runs and writes the requested outputs into `out_dir`, named after
/// the scenario file stem. Returns the run and the paths written.
pub fn run_scenario(path: &Path, out_dir: &Path, rank_tol: f64) -> Result<(ScenarioRun, Vec<PathBuf>)> {
    let scenario = Scenario::load(path)?;
    let run = execute(&scenario, rank_tol)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let mut written = Vec::new();
    if !scenario.outputs.is_empty() {
        fs::create_dir_all(out_dir)?;
    }
    for kind in &scenario.outputs {
        let target = match kind {
            OutputKind::TraceCsv => {
                let p = out_dir.join(format!("{stem}_trace.csv"));
                output::write_trace_csv(&p, &run.trace)?;
                p
            }
            OutputKind::SummaryJson => {
                let p = out_dir.join(format!("{stem}_summary.json"));
                output::write_json(&p, &run.summary)?;
                p
            }
            OutputKind::RateTable => {
                let p = out_dir.join(format!("{stem}_rates.csv"));
                output::write_rate_table(&p, &run.trace, run.rate_bound.as_ref().map(|b| b.bound))?;
                p
            }
        };
        written.push(target);
    }
    Ok((run, written))
}
