//! The iteration `u_{n+1} = P_U P_W^{α_n} u_n` in its two equivalent forms,
//! alternating projections and Landweber steps `u + α Q*(w - Qu)`, with
//! traces, stopping rules, rate estimates and spectral cross-checks.

use serde::{Deserialize, Serialize};

use crate::angles::{self, AngleReport};
use crate::error::{Error, Result};
use crate::hilbert::{self, Vector};
use crate::operator::RestrictedProjector;
use crate::schedule::{self, Schedule};
use crate::subspace::ProblemGeometry;

/// A canonical geometry together with its operator and angle data.
#[derive(Debug, Clone)]
pub struct Problem {
    pub geometry: ProblemGeometry,
    pub projector: RestrictedProjector,
    pub angles: AngleReport,
}

impl Problem {
    /// Canonicalizes `g` and builds `Q` and the angle report with the
    /// intersection tolerance `tol`.
    pub fn new(g: &ProblemGeometry, tol: f64) -> Result<Self> {
        let geometry = g.canonicalize();
        let projector = RestrictedProjector::build(&geometry, tol)?;
        let angles = angles::compute_report(&geometry, tol)?;
        Ok(Self {
            geometry,
            projector,
            angles,
        })
    }

    pub fn w(&self) -> &Vector {
        self.geometry.w()
    }

    pub fn limit_point(&self, u0: &Vector) -> Result<Vector> {
        self.projector.limit_point(self.w(), u0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    Stalled,
    /// The error grew past `divergence_factor` times the problem scale
    /// `max(||e_0||, ||u_0||, ||limit||)`.
    Diverged,
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Stop once the error norm is at or below this value.
    pub conv_tol: f64,
    /// Window for stall detection; `None` disables it.
    pub stall_window: Option<usize>,
    /// Relative change below which the error counts as frozen.
    pub stall_rel: f64,
    pub divergence_factor: f64,
    /// Every iterate up to this step is stored ...
    pub full_history: usize,
    /// ... then every `thin_every`-th one (plus the last).
    pub thin_every: usize,
    /// Trailing window for the empirical rate.
    pub rate_window: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            conv_tol: 1e-10,
            stall_window: Some(50),
            stall_rel: 1e-15,
            divergence_factor: 1e12,
            full_history: 1000,
            thin_every: 100,
            rate_window: 50,
        }
    }
}

impl RunOptions {
    pub fn with_limits(max_iters: usize, conv_tol: f64) -> Self {
        Self {
            max_iters,
            conv_tol,
            ..Self::default()
        }
    }
}

/// Record of one run. Per-step scalars are kept for every step; iterates are
/// thinned after `full_history` steps.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub iterates: Vec<Vector>,
    /// Step index of each stored iterate.
    pub iterate_steps: Vec<usize>,
    /// `||u_n - limit||`, `n = 0..=steps`.
    pub error_norms: Vec<f64>,
    /// `d(u_n, W)`, `n = 0..=steps`.
    pub residuals: Vec<f64>,
    /// `α_n` used to go from `u_n` to `u_{n+1}`.
    pub alphas_used: Vec<f64>,
    /// `ρ_{α_n}` for each step taken.
    pub rhos: Vec<f64>,
    pub stop_reason: StopReason,
    pub estimated_rate: Option<f64>,
    /// Set when the supplied starting point was not in `U` and got projected.
    pub u0_projected: bool,
    pub limit: Vector,
}

impl IterationTrace {
    pub fn steps(&self) -> usize {
        self.alphas_used.len()
    }

    pub fn final_error(&self) -> f64 {
        *self.error_norms.last().expect("trace has an initial entry")
    }

    pub fn final_iterate(&self) -> &Vector {
        self.iterates.last().expect("trace has an initial iterate")
    }
}

struct Recorder<'a> {
    q: &'a RestrictedProjector,
    opts: RunOptions,
    /// Reference size for the divergence test. `e_0` alone can be exactly 0
    /// (start on the limit), and then rounding noise would look like blow-up.
    scale: f64,
    trace: IterationTrace,
}

enum Step {
    Continue,
    Stop(StopReason),
}

impl<'a> Recorder<'a> {
    fn new(q: &'a RestrictedProjector, opts: RunOptions, u0: &Vector, limit: Vector, u0_projected: bool) -> Self {
        let scale = (u0 - &limit).norm().max(u0.norm()).max(limit.norm()).max(f64::MIN_POSITIVE);
        Self {
            q,
            opts,
            scale,
            trace: IterationTrace {
                iterates: Vec::new(),
                iterate_steps: Vec::new(),
                error_norms: Vec::new(),
                residuals: Vec::new(),
                alphas_used: Vec::new(),
                rhos: Vec::new(),
                stop_reason: StopReason::MaxIters,
                estimated_rate: None,
                u0_projected,
                limit,
            },
        }
    }

    fn record(&mut self, n: usize, u: &Vector, residual: f64) -> Result<Step> {
        hilbert::ensure_finite_vec(u, &format!("iterate {n}"))?;
        let err = (u - &self.trace.limit).norm();
        // Finite coordinates can still overflow the norm near f64::MAX.
        if !err.is_finite() || !residual.is_finite() {
            return Err(Error::NonFinite(format!("error norm at iterate {n}")));
        }
        let t = &mut self.trace;
        t.error_norms.push(err);
        t.residuals.push(residual);
        let keep = n <= self.opts.full_history || n % self.opts.thin_every.max(1) == 0;
        if keep {
            t.iterates.push(u.clone());
            t.iterate_steps.push(n);
        }
        if err <= self.opts.conv_tol {
            return Ok(Step::Stop(StopReason::Converged));
        }
        if err > self.opts.divergence_factor * self.scale {
            return Ok(Step::Stop(StopReason::Diverged));
        }
        if let Some(w) = self.opts.stall_window {
            if n >= w {
                let past = t.error_norms[n - w];
                if (past - err).abs() <= self.opts.stall_rel * past {
                    return Ok(Step::Stop(StopReason::Stalled));
                }
            }
        }
        Ok(Step::Continue)
    }

    fn push_alpha(&mut self, alpha: f64) {
        self.trace.alphas_used.push(alpha);
        self.trace.rhos.push(contraction_factor(self.q, alpha));
    }

    fn finish(mut self, reason: StopReason, u: &Vector) -> IterationTrace {
        let n = self.trace.steps();
        if self.trace.iterate_steps.last() != Some(&n) {
            self.trace.iterates.push(u.clone());
            self.trace.iterate_steps.push(n);
        }
        self.trace.stop_reason = reason;
        let len = self.trace.error_norms.len();
        if len >= 2 {
            let window = self.opts.rate_window.min(len - 1);
            self.trace.estimated_rate = estimate_rate_from(&self.trace.error_norms, window).ok();
        }
        self.trace
    }
}

fn start_in_domain(q: &RestrictedProjector, u0: &Vector) -> Result<(Vector, bool)> {
    if u0.len() != q.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: q.ambient_dim(),
            found: u0.len(),
        });
    }
    hilbert::ensure_finite_vec(u0, "u0")?;
    if q.distance_from_domain(u0) <= 1e-12 {
        Ok((u0.clone(), false))
    } else {
        let b = q.domain_basis();
        Ok((b * (b.transpose() * u0), true))
    }
}

fn drive<F>(
    q: &RestrictedProjector,
    w: &Vector,
    s: &Schedule,
    u0: &Vector,
    opts: &RunOptions,
    mut step: F,
    residual: impl Fn(&Vector) -> Result<f64>,
) -> Result<IterationTrace>
where
    F: FnMut(&Vector, f64) -> Result<Vector>,
{
    s.validate()?;
    let (mut u, projected) = start_in_domain(q, u0)?;
    let limit = q.limit_point(w, &u)?;
    let mut rec = Recorder::new(q, *opts, &u, limit, projected);
    if let Step::Stop(reason) = rec.record(0, &u, residual(&u)?)? {
        return Ok(rec.finish(reason, &u));
    }
    for (n, alpha) in s.alphas(opts.max_iters).into_iter().enumerate() {
        u = step(&u, alpha)?;
        rec.push_alpha(alpha);
        if let Step::Stop(reason) = rec.record(n + 1, &u, residual(&u)?)? {
            return Ok(rec.finish(reason, &u));
        }
    }
    Ok(rec.finish(StopReason::MaxIters, &u))
}

/// Alternating form: `u_{n+1} = P_U (P_W^{α_n} u_n)`.
pub fn run_alternating(p: &Problem, s: &Schedule, u0: &Vector, opts: &RunOptions) -> Result<IterationTrace> {
    let g = &p.geometry;
    drive(
        &p.projector,
        p.w(),
        s,
        u0,
        opts,
        |u, alpha| g.u_space().project(&g.w_space().project_relaxed(u, alpha)?),
        |u| g.w_space().distance(u),
    )
}

/// Landweber form: `u_{n+1} = u_n + α_n Q*(w - Q u_n)`.
///
/// Residuals are reported as `||w - Q u_n||`, which equals `d(u_n, W)` on `U`.
pub fn run_landweber(
    q: &RestrictedProjector,
    w: &Vector,
    s: &Schedule,
    u0: &Vector,
    opts: &RunOptions,
) -> Result<IterationTrace> {
    drive(
        q,
        w,
        s,
        u0,
        opts,
        |u, alpha| {
            let r = w - q.apply(u)?;
            Ok(u + q.adjoint_apply(&r)? * alpha)
        },
        |u| q.residual(w, u),
    )
}

/// Returns `(iterated, spectral)`: `n` applications of `I - α_j Q*Q` to `e0`,
/// and `Σ_i f_n(λ_i) P_i e0` from the eigendecomposition of `Q*Q`.
pub fn error_recursion_check(
    q: &RestrictedProjector,
    s: &Schedule,
    e0: &Vector,
    n: usize,
) -> Result<(Vector, Vector)> {
    if q.distance_from_domain(e0) > 1e-10 {
        return Err(Error::invalid("e0 must lie in U"));
    }
    let null_part = q.project_nullspace(e0)?.norm() / e0.norm().max(f64::MIN_POSITIVE);
    if null_part > 1e-10 {
        return Err(Error::NotInRange(null_part));
    }
    let alphas = s.alphas(n);

    let mut iterated = e0.clone();
    for &alpha in &alphas {
        iterated -= q.gram_apply(&iterated)? * alpha;
    }

    let basis = q.domain_basis();
    let eig = hilbert::sym_eig(&q.gram_coords())?;
    let coords = eig.vectors.transpose() * (basis.transpose() * e0);
    let filtered = Vector::from_fn(coords.len(), |i, _| {
        let lambda = eig.values[i];
        let f: f64 = alphas.iter().map(|a| 1.0 - a * lambda).product();
        f * coords[i]
    });
    let spectral = basis * (&eig.vectors * filtered);
    Ok((iterated, spectral))
}

/// `ρ_α = max(1 - α γ(Q)², α ||Q||² - 1)`, the norm of `I - α Q*Q` on `N(Q)^⊥`.
pub fn contraction_factor(q: &RestrictedProjector, alpha: f64) -> f64 {
    let g = q.reduced_min_modulus();
    let n = q.norm();
    (1.0 - alpha * g * g).max(alpha * n * n - 1.0)
}

/// Norm of `I - α Q*Q` restricted to `N(Q)^⊥`, from an eigendecomposition of
/// the restricted operator. Independent of [`contraction_factor`].
pub fn contraction_factor_spectral(q: &RestrictedProjector, alpha: f64) -> Result<f64> {
    let r = q.range_coords();
    if r.ncols() == 0 {
        return Ok(0.0);
    }
    let t = q.gram_coords();
    let k = t.nrows();
    let reduced = r.transpose() * (hilbert::Matrix::identity(k, k) - t * alpha) * r;
    let eig = hilbert::sym_eig(&reduced)?;
    Ok(eig.values.iter().fold(0.0_f64, |m, l| m.max(l.abs())))
}

/// Empirical per-step factor: `exp` of the least-squares slope of
/// `ln ||e_n||` over the last `window + 1` recorded errors.
pub fn estimate_rate(trace: &IterationTrace, window: usize) -> Result<f64> {
    estimate_rate_from(&trace.error_norms, window)
}

pub fn estimate_rate_from(errors: &[f64], window: usize) -> Result<f64> {
    if window == 0 || errors.len() < window + 1 {
        return Err(Error::invalid(format!(
            "need at least {} error norms, have {}",
            window + 1,
            errors.len()
        )));
    }
    let tail = &errors[errors.len() - window - 1..];
    if tail.iter().any(|&e| e == 0.0) {
        return Ok(0.0);
    }
    let m = tail.len() as f64;
    let x_mean = (m - 1.0) / 2.0;
    let logs: Vec<f64> = tail.iter().map(|e| e.ln()).collect();
    let y_mean = logs.iter().sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, y) in logs.iter().enumerate() {
        let dx = i as f64 - x_mean;
        num += dx * (y - y_mean);
        den += dx * dx;
    }
    Ok((num / den).exp())
}

/// The linear-rate bound `1 - ε γ²/ν²` for a run, with
/// `ε = min_n min(α_n ν², 2 - α_n ν²)`.
#[derive(Debug, Clone, Serialize)]
pub struct RateBound {
    pub epsilon: f64,
    pub nu: f64,
    pub gamma: f64,
    pub bound: f64,
    pub per_step_factors: Vec<f64>,
}

impl RateBound {
    /// `None` when the hypotheses fail (`ν = 0`, `γ = 0` or `ε ≤ 0`).
    pub fn for_alphas(q: &RestrictedProjector, nu: f64, gamma: f64, alphas: &[f64]) -> Option<Self> {
        if alphas.is_empty() || !(nu > 0.0) || !(gamma > 0.0) {
            return None;
        }
        let epsilon = alphas
            .iter()
            .map(|a| {
                let s = a * nu * nu;
                s.min(2.0 - s)
            })
            .fold(f64::INFINITY, f64::min);
        if !(epsilon > 0.0) {
            return None;
        }
        Some(Self {
            epsilon,
            nu,
            gamma,
            bound: uniform_rate_bound(nu, gamma, epsilon),
            per_step_factors: alphas.iter().map(|&a| contraction_factor(q, a)).collect(),
        })
    }
}

pub fn uniform_rate_bound(nu: f64, gamma: f64, epsilon: f64) -> f64 {
    1.0 - epsilon * gamma * gamma / (nu * nu)
}

/// Convenience wrapper over [`schedule::filter_poly`] for a whole spectrum.
pub fn filter_spectrum(s: &Schedule, lambdas: &[f64], n: usize) -> Vec<f64> {
    lambdas.iter().map(|&l| schedule::filter_poly(s, l, n)).collect()
}
