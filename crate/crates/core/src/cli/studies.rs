//! The two stand-alone experiments: constant over-relaxation beyond 2 on a
//! geometry with prescribed `ν`, and the growth of `||Q_d† w||` for diagonal
//! truncations of an operator whose pseudo-inverse is unbounded on `w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generate;
use crate::engine::{self, Problem, RunOptions, StopReason};
use crate::error::{Error, Result};
use crate::hilbert;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunVerdict {
    Converged,
    Diverged,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverrelaxRow {
    pub alpha: f64,
    pub alpha_nu2: f64,
    pub verdict: RunVerdict,
    pub stop_reason: StopReason,
    pub iters: usize,
    pub initial_error: f64,
    pub final_error: f64,
    pub empirical_rate: Option<f64>,
    pub rho_alpha: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OverrelaxOptions {
    pub max_iters: usize,
    pub conv_tol: f64,
    /// Trailing steps over which a non-decreasing error counts as divergence.
    pub growth_window: usize,
}

impl Default for OverrelaxOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            conv_tol: 1e-8,
            growth_window: 100,
        }
    }
}

/// Principal angles used by the over-relaxation study: the top one fixes
/// `||Q|| = ν`, the other two spread the spectrum of `Q*Q` below it.
pub fn overrelax_angles(nu: f64) -> [f64; 3] {
    [nu.asin(), (0.7 * nu).asin(), (0.4 * nu).asin()]
}

/// The geometry of the over-relaxation study, rotated by a seeded rigid
/// motion.
pub fn overrelax_problem(nu2: f64, seed: u64) -> Result<Problem> {
    if !(nu2 > 0.0 && nu2 < 1.0) {
        return Err(Error::Config(format!("nu^2 must lie in (0, 1), got {nu2}")));
    }
    let g = generate::controlled_angle(&overrelax_angles(nu2.sqrt()), 1.0)?;
    let g = generate::rotate(&g, &generate::random_rotation(g.ambient_dim(), seed)?)?;
    Problem::new(&g, hilbert::DEFAULT_INTERSECTION_TOL)
}

fn is_non_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0])
}

/// Runs constant-`α` schedules on one geometry with `||Q||² = nu2`.
pub fn overrelaxation_study(nu2: f64, alphas: &[f64], seed: u64, opts: &OverrelaxOptions) -> Result<Vec<OverrelaxRow>> {
    let problem = overrelax_problem(nu2, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = problem.projector.domain_basis();
    let coords = generate::gaussian_vector(&mut rng, basis.ncols()).normalize();
    let u0 = basis * coords;
    let run_opts = RunOptions::with_limits(opts.max_iters, opts.conv_tol);

    alphas
        .iter()
        .map(|&alpha| {
            if !(alpha.is_finite() && alpha >= 0.0) {
                return Err(Error::Config(format!("relaxation must be finite and >= 0, got {alpha}")));
            }
            let t = engine::run_alternating(&problem, &Schedule::Constant { alpha }, &u0, &run_opts)?;
            let errs = &t.error_norms;
            let tail = &errs[errs.len().saturating_sub(opts.growth_window + 1)..];
            let verdict = match t.stop_reason {
                StopReason::Converged => RunVerdict::Converged,
                StopReason::Diverged => RunVerdict::Diverged,
                _ if t.final_error() > errs[0] && is_non_decreasing(tail) => RunVerdict::Diverged,
                _ => RunVerdict::NotConverged,
            };
            Ok(OverrelaxRow {
                alpha,
                alpha_nu2: alpha * problem.projector.norm().powi(2),
                verdict,
                stop_reason: t.stop_reason,
                iters: t.steps(),
                initial_error: errs[0],
                final_error: t.final_error(),
                empirical_rate: t.estimated_rate,
                rho_alpha: engine::contraction_factor(&problem.projector, alpha),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub d: usize,
    /// `||Q_d† w_d||` from the elementwise pseudo-inverse.
    pub limit_norm: f64,
    /// `sqrt(Σ_{i≤d} i^{2(p-r)})`.
    pub closed_form: f64,
    /// `||u_n||` after the requested number of steps from `u_0 = 0`.
    pub iterate_norm: f64,
    pub iters: usize,
}

/// Diagonal `Q_d = diag(i^{-p})`, `w_d = (i^{-r})`, `i = 1..d`.
pub fn truncation_data(p: f64, r: f64, d: usize) -> (Vec<f64>, Vec<f64>) {
    let idx = 1..=d;
    let sigma = idx.clone().map(|i| (i as f64).powf(-p)).collect();
    let w = idx.map(|i| (i as f64).powf(-r)).collect();
    (sigma, w)
}

pub fn truncation_closed_form(p: f64, r: f64, d: usize) -> f64 {
    (1..=d).map(|i| (i as f64).powf(2.0 * (p - r))).sum::<f64>().sqrt()
}

/// For each `d`, the norm of the minimal-norm least-squares solution of the
/// truncated system and of the Landweber iterate after `iters` steps of
/// `schedule` from zero.
pub fn truncation_study(p: f64, r: f64, dims: &[usize], schedule: &Schedule, iters: usize) -> Result<Vec<TruncationRow>> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Config(format!("sigma decay exponent must be positive, got {p}")));
    }
    if !r.is_finite() {
        return Err(Error::Config(format!("w decay exponent must be finite, got {r}")));
    }
    if dims.contains(&0) {
        return Err(Error::Config("dimensions must be at least 1".into()));
    }
    schedule.validate()?;
    let alphas = schedule.alphas(iters);
    dims.iter()
        .map(|&d| {
            let (sigma, w) = truncation_data(p, r, d);
            let limit_norm = sigma.iter().zip(&w).map(|(s, x)| (x / s).powi(2)).sum::<f64>().sqrt();
            // Each coordinate evolves independently: u ← u + α σ (w - σ u).
            let mut u = vec![0.0; d];
            for &a in &alphas {
                for i in 0..d {
                    u[i] += a * sigma[i] * (w[i] - sigma[i] * u[i]);
                }
            }
            let iterate_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            hilbert::ensure_finite_vec(&hilbert::Vector::from_vec(u), "truncation iterate")?;
            Ok(TruncationRow {
                d,
                limit_norm,
                closed_form: truncation_closed_form(p, r, d),
                iterate_norm,
                iters,
            })
        })
        .collect()
}
