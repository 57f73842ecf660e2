//! Relaxation sequences `(α_n)` and the tools used to reason about them:
//! numerical membership checks for the class of sequences in `[0, 2]` with
//! `Σ s_n (2 - s_n) = ∞`, filter polynomials `f_n(λ) = Π_{j<n} (1 - α_j λ)`,
//! and the product/sum bound behind them.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_start_harmonic() -> u64 {
    1
}

fn default_ratio() -> f64 {
    0.5
}

/// A relaxation sequence. Every kind is a pure function of its parameters
/// and the index `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Constant { alpha: f64 },
    /// Repeats `values` periodically.
    Cyclic { values: Vec<f64> },
    /// `α_n = 2 - 1/(n + start)`, `start ≥ 1`.
    HarmonicToTwo {
        #[serde(default = "default_start_harmonic")]
        start: u64,
    },
    /// `α_n = 2 - ratio^(n + start)`, `0 < ratio < 1`.
    GeometricToTwo {
        #[serde(default = "default_ratio")]
        ratio: f64,
        #[serde(default)]
        start: u64,
    },
    /// The listed values, then the last one held forever.
    Explicit { values: Vec<f64> },
    /// Independent uniform draws in `[lo, hi]`, reproducible from `seed`.
    RandomUniform { lo: f64, hi: f64, seed: u64 },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            Schedule::Constant { alpha } if !(alpha.is_finite() && *alpha >= 0.0) => {
                bad(format!("constant relaxation must be finite and >= 0, got {alpha}"))
            }
            Schedule::Cyclic { values } | Schedule::Explicit { values } => {
                if values.is_empty() {
                    return bad("relaxation list is empty".into());
                }
                match values.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
                    Some(a) => bad(format!("relaxation values must be finite and >= 0, got {a}")),
                    None => Ok(()),
                }
            }
            Schedule::HarmonicToTwo { start } if *start == 0 => bad("harmonic schedule needs start >= 1".into()),
            Schedule::GeometricToTwo { ratio, .. } if !(*ratio > 0.0 && *ratio < 1.0) => {
                bad(format!("geometric ratio must lie in (0, 1), got {ratio}"))
            }
            Schedule::RandomUniform { lo, hi, .. } if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo <= hi) => {
                bad(format!("random bounds must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"))
            }
            _ => Ok(()),
        }
    }

    /// `α_n`.
    pub fn alpha(&self, n: usize) -> f64 {
        match self {
            Schedule::Constant { alpha } => *alpha,
            Schedule::Cyclic { values } => values[n % values.len()],
            Schedule::HarmonicToTwo { start } => 2.0 - 1.0 / (n as f64 + *start as f64),
            Schedule::GeometricToTwo { ratio, start } => {
                let exp = (n as u64).saturating_add(*start);
                2.0 - ratio.powf(exp as f64)
            }
            Schedule::Explicit { values } => values[n.min(values.len() - 1)],
            Schedule::RandomUniform { lo, hi, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(2 * n as u128);
                let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                lo + (hi - lo) * unit
            }
        }
    }

    /// `α_0, …, α_{count-1}`.
    pub fn alphas(&self, count: usize) -> Vec<f64> {
        match self {
            Schedule::RandomUniform { lo, hi, seed } => {
                // same stream as `alpha(n)`, generated in one pass
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..count)
                    .map(|n| {
                        rng.set_word_pos(2 * n as u128);
                        let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                        lo + (hi - lo) * unit
                    })
                    .collect()
            }
            _ => (0..count).map(|n| self.alpha(n)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DivergesNumerically,
    ConvergesNumerically,
    Indeterminate,
}

/// Knobs for the finite-horizon divergence heuristic.
#[derive(Debug, Clone, Copy)]
pub struct DiagnoseOptions {
    pub horizon: usize,
    /// A partial sum at least this large counts as divergence.
    pub growth_threshold: f64,
    /// Divergence is also declared when the last quarter of the horizon adds
    /// at least this fraction of the total ...
    pub tail_fraction: f64,
    /// ... and at least this much in absolute terms.
    pub tail_floor: f64,
    /// Convergence is declared when the last quarter adds at most this much,
    /// relative to `max(1, total)`.
    pub converge_tol: f64,
}

impl Default for DiagnoseOptions {
    fn default() -> Self {
        Self {
            horizon: 10_000,
            growth_threshold: 50.0,
            tail_fraction: 0.01,
            tail_floor: 0.1,
            converge_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleDiagnostics {
    /// The factor `μ` in `s_n = α_n μ`.
    pub scaled_by: f64,
    pub horizon: usize,
    /// Term counts `N` at which `partial_sums` are reported.
    pub checkpoints: Vec<usize>,
    /// `Σ_{n<N} s_n (2 - s_n)` for each checkpoint.
    pub partial_sums: Vec<f64>,
    /// `min_n min(s_n, 2 - s_n)` over the horizon.
    pub epsilon: f64,
    /// Whether `s_n ∈ [ε, 2 - ε]` for all `n` in the horizon with `ε > 0`.
    pub in_box: bool,
    /// Number of `s_n` outside `[0, 2]`.
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub verdict: Verdict,
}

/// Finite-horizon heuristic for whether `(α_n μ)` belongs to the class.
///
/// Divergence of a series cannot be decided from finitely many terms, so the
/// verdict is a numerical indication only.
pub fn diagnose(s: &Schedule, mu: f64, opts: &DiagnoseOptions) -> Result<ScheduleDiagnostics> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!("scale factor must be positive, got {mu}")));
    }
    if opts.horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    s.validate()?;
    let h = opts.horizon;
    let mut checkpoints: Vec<usize> = (1..=4).map(|q| (h * q / 4).max(1)).collect();
    checkpoints.dedup();

    let mut partial_sums = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    let mut sum = 0.0;
    let mut epsilon = f64::INFINITY;
    let mut violations = 0;
    let mut first_violation = None;
    for (n, alpha) in s.alphas(h).into_iter().enumerate() {
        let sn = alpha * mu;
        if !(0.0..=2.0).contains(&sn) {
            violations += 1;
            first_violation.get_or_insert(n);
        }
        sum += sn * (2.0 - sn);
        epsilon = epsilon.min(sn.min(2.0 - sn));
        if n + 1 == checkpoints[next] {
            partial_sums.push(sum);
            next += 1;
        }
    }

    let total = *partial_sums.last().expect("at least one checkpoint");
    let three_quarters = if partial_sums.len() >= 2 { partial_sums[partial_sums.len() - 2] } else { 0.0 };
    let tail = total - three_quarters;
    let verdict = if total >= opts.growth_threshold
        || (tail >= opts.tail_fraction * total && tail >= opts.tail_floor)
    {
        Verdict::DivergesNumerically
    } else if tail.abs() <= opts.converge_tol * total.abs().max(1.0) {
        Verdict::ConvergesNumerically
    } else {
        Verdict::Indeterminate
    };

    Ok(ScheduleDiagnostics {
        scaled_by: mu,
        horizon: h,
        checkpoints,
        partial_sums,
        epsilon,
        in_box: epsilon > 0.0 && violations == 0,
        violations,
        first_violation,
        verdict,
    })
}

/// `f_n(λ) = Π_{j<n} (1 - α_j λ)`, with `f_0 = 1`.
pub fn filter_poly(s: &Schedule, lambda: f64, n: usize) -> f64 {
    s.alphas(n).into_iter().map(|a| 1.0 - a * lambda).product()
}

/// Returns `(Σ_{n<h} s_n (2 - s_n), Π_{n<h} |1 - s_n|)` for `s_n ∈ [0, 2]`.
pub fn sum_product_check(s_values: &[f64], horizon: usize) -> Result<(f64, f64)> {
    let terms = checked_prefix(s_values, horizon)?;
    let partial_sum = terms.iter().map(|s| s * (2.0 - s)).sum();
    let abs_product = terms.iter().map(|s| (1.0 - s).abs()).product();
    Ok((partial_sum, abs_product))
}

/// `exp(-Σ_{n<h} min(s_n, 2 - s_n))`, an upper bound on `Π_{n<h} |1 - s_n|`.
pub fn product_upper_bound(s_values: &[f64], horizon: usize) -> Result<f64> {
    let terms = checked_prefix(s_values, horizon)?;
    Ok((-terms.iter().map(|s| s.min(2.0 - s)).sum::<f64>()).exp())
}

fn checked_prefix(s_values: &[f64], horizon: usize) -> Result<&[f64]> {
    if horizon > s_values.len() {
        return Err(Error::invalid(format!(
            "horizon {horizon} exceeds the {} supplied values",
            s_values.len()
        )));
    }
    let terms = &s_values[..horizon];
    if let Some(bad) = terms.iter().find(|s| !(0.0..=2.0).contains(*s)) {
        return Err(Error::invalid(format!("value {bad} lies outside [0, 2]")));
    }
    Ok(terms)
}

/// Largest constant `α` with `α ν² ∈ [ε, 2 - ε]`, i.e. `(2 - ε)/ν²`.
///
/// Exceeds 2 whenever `ν² < 1 - ε/2`.
pub fn max_admissible_constant(nu: f64, eps: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::invalid(format!("nu must lie in (0, 1], got {nu}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    Ok((2.0 - eps) / (nu * nu))
}
