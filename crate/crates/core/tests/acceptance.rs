//! Acceptance suite: twelve end-to-end checks, each printing one PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the lines in order.

mod common;

use std::time::Instant;

use altproj::angles;
use altproj::cli::{generate, studies, OverrelaxOptions, RunVerdict};
use altproj::engine::{self, RunOptions, StopReason};
use altproj::hilbert::{self, Matrix, Vector};
use altproj::schedule::{self, Schedule};
use altproj::AffineSubspace;
use common::{intersecting_geometry, point_in_u, problem, random_geometry, report, rng};
use rand::Rng;

#[test]
fn criterion_01_form_equivalence() {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let mut compared = 0usize;
    for _ in 0..100 {
        let g = random_geometry(&mut r, 30, 10);
        let p = problem(&g);
        let nu = p.projector.norm();
        let hi = if nu > 0.0 { 2.0 / (nu * nu) } else { 2.0 };
        let s = Schedule::RandomUniform { lo: 0.0, hi, seed: r.random() };
        let u0 = point_in_u(&mut r, &p);
        // compare every step: never stop early, even on an exact zero error
        let opts = RunOptions {
            stall_window: None,
            ..RunOptions::with_limits(100, f64::NEG_INFINITY)
        };
        let a = engine::run_alternating(&p, &s, &u0, &opts).unwrap();
        let b = engine::run_landweber(&p.projector, p.w(), &s, &u0, &opts).unwrap();
        assert_eq!(a.iterate_steps, b.iterate_steps);
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            worst = worst.max((x - y).norm() / x.norm().max(1.0));
            compared += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        1,
        "form equivalence",
        worst <= 1e-12 && secs <= 10.0,
        &format!("{compared} iterates over 100 problems, max relative gap {worst:.2e}, {secs:.2} s"),
    );
}

/// Problems with `γ(Q) ≥ 0.3` and a constant `α` with `α ν² ∈ [0.5, 1.5]`.
fn well_conditioned_runs() -> Vec<(f64, f64, f64, engine::IterationTrace)> {
    let mut r = rng(202);
    let mut out = Vec::new();
    while out.len() < 50 {
        let d = r.random_range(4..=20);
        let k_u = r.random_range(1..=4.min(d - 1));
        let k_w = r.random_range(1..=(d - 1).min(10));
        let g = generate::random_geometry(d, k_u, k_w, r.random(), hilbert::DEFAULT_RANK_TOL).unwrap();
        let p = problem(&g);
        let (nu, gamma) = (p.projector.norm(), p.projector.reduced_min_modulus());
        if gamma < 0.3 {
            continue;
        }
        let scaled = r.random_range(0.5..=1.5);
        let alpha = scaled / (nu * nu);
        let u0 = point_in_u(&mut r, &p);
        let t = engine::run_alternating(
            &p,
            &Schedule::Constant { alpha },
            &u0,
            &RunOptions::with_limits(10_000, 1e-9),
        )
        .unwrap();
        out.push((nu, gamma, scaled, t));
    }
    out
}

#[test]
fn criterion_02_limit_correctness() {
    let runs = well_conditioned_runs();
    let worst = runs.iter().map(|(_, _, _, t)| t.final_error()).fold(0.0, f64::max);
    let max_iters = runs.iter().map(|(_, _, _, t)| t.steps()).max().unwrap();
    report(
        2,
        "limit correctness",
        worst <= 1e-8 && max_iters <= 10_000,
        &format!("50 problems, worst final distance to limit {worst:.2e}, at most {max_iters} iterations"),
    );
}

#[test]
fn criterion_03_rate_bound() {
    let runs = well_conditioned_runs();
    let mut worst_margin = f64::NEG_INFINITY;
    for (nu, gamma, scaled, t) in &runs {
        let eps = scaled.min(2.0 - scaled);
        let bound = engine::uniform_rate_bound(*nu, *gamma, eps);
        let rate = t.estimated_rate.expect("rate estimate");
        worst_margin = worst_margin.max(rate - bound);
    }
    report(
        3,
        "rate bound",
        worst_margin <= 0.02,
        &format!("50 problems, max(empirical - bound) = {worst_margin:.3e} (allowed 0.02)"),
    );
}

#[test]
fn criterion_04_unrelaxed_classical_rate() {
    let mut details = Vec::new();
    let mut ok = true;
    for phi in [15.0f64, 30.0, 60.0] {
        let g = generate::controlled_angle_deg(&[phi], 1.0).unwrap();
        let p = problem(&g);
        let u0 = Vector::from_column_slice(&[2.0, 0.0, 0.0]);
        let t = engine::run_alternating(&p, &Schedule::Constant { alpha: 1.0 }, &u0, &RunOptions::with_limits(10_000, 1e-10))
            .unwrap();
        let rate = t.estimated_rate.unwrap();
        let expected = phi.to_radians().cos().powi(2);
        // the Friedrichs cosine from the angles module is the same number
        let cf = p.angles.friedrichs_cos;
        ok &= (rate - expected).abs() <= 0.01 && (cf * cf - expected).abs() <= 1e-12;
        details.push(format!("{phi}°: {rate:.6} vs {expected:.6}"));
    }
    report(4, "unrelaxed classical rate", ok, &details.join(", "));
}

#[test]
fn criterion_05_overrelaxation_beyond_two() {
    let nu2 = 0.5;
    let p = studies::overrelax_problem(nu2, 5).unwrap();
    let mut r = rng(5);
    let u0 = point_in_u(&mut r, &p);

    let conv = engine::run_alternating(&p, &Schedule::Constant { alpha: 3.0 }, &u0, &RunOptions::with_limits(10_000, 1e-8))
        .unwrap();
    let conv_ok = conv.stop_reason == StopReason::Converged && conv.final_error() < 1e-8;

    let div = engine::run_alternating(&p, &Schedule::Constant { alpha: 4.2 }, &u0, &RunOptions::with_limits(10_000, 1e-8))
        .unwrap();
    let e = &div.error_norms;
    let tail = &e[e.len() - 101..];
    let div_ok = tail.windows(2).all(|w| w[1] >= w[0]);

    let grid: Vec<f64> = (1..=60).map(|i| i as f64 * 0.1).collect();
    let rows = studies::overrelaxation_study(nu2, &grid, 5, &OverrelaxOptions::default()).unwrap();
    let misplaced: Vec<f64> = rows
        .iter()
        .filter(|row| {
            let s = row.alpha_nu2;
            (s < 1.95 && row.verdict != RunVerdict::Converged)
                || (s > 2.05 && row.verdict != RunVerdict::Diverged)
                || (s > 2.0 && row.verdict == RunVerdict::Converged)
                || (s < 2.0 && row.verdict == RunVerdict::Diverged)
        })
        .map(|row| row.alpha)
        .collect();
    report(
        5,
        "over-relaxation beyond 2",
        conv_ok && div_ok && misplaced.is_empty(),
        &format!(
            "alpha=3: {:?} after {} steps (error {:.1e}); alpha=4.2: last 100 errors non-decreasing = {div_ok}, {} -> {:.1e}; grid misplaced {misplaced:?}",
            conv.stop_reason,
            conv.steps(),
            conv.final_error(),
            e[0],
            div.final_error()
        ),
    );
}

#[test]
fn criterion_06_spectral_oracle() {
    let mut r = rng(606);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let g = random_geometry(&mut r, 20, 8);
        let p = problem(&g);
        let q = &p.projector;
        if q.norm() == 0.0 {
            continue;
        }
        let u = point_in_u(&mut r, &p);
        let e0 = &u - q.project_nullspace(&u).unwrap();
        let s = Schedule::RandomUniform { lo: 0.0, hi: 2.0 / q.norm().powi(2), seed: r.random() };
        let (a, b) = engine::error_recursion_check(q, &s, &e0, 50).unwrap();
        worst = worst.max((a - b).norm() / e0.norm().max(1.0));
    }
    report(6, "spectral oracle", worst <= 1e-10, &format!("n = 50, 20 problems, max gap {worst:.2e}"));
}

#[test]
fn criterion_07_contraction_factor_formula() {
    let mut r = rng(707);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 20 {
        let g = random_geometry(&mut r, 16, 8);
        let p = problem(&g);
        let q = &p.projector;
        if q.norm() == 0.0 {
            continue;
        }
        count += 1;
        let top = 2.0 / q.norm().powi(2);
        for i in 0..=40 {
            let alpha = top * i as f64 / 40.0;
            let formula = engine::contraction_factor(q, alpha);
            let oracle = engine::contraction_factor_spectral(q, alpha).unwrap();
            worst = worst.max((formula - oracle).abs());
        }
    }
    report(
        7,
        "contraction factor formula",
        worst <= 1e-10,
        &format!("41-point grid on [0, 2/||Q||^2], 20 geometries, max gap {worst:.2e}"),
    );
}

/// `||P_U P_{V⊥} P_U||` in ambient coordinates: an oracle for `||Q||²`.
fn ambient_norm_sq_oracle(u: &Matrix, v: &Matrix) -> f64 {
    let d = u.nrows();
    let pu = u * u.transpose();
    let pvp = Matrix::identity(d, d) - v * v.transpose();
    let m = &pu * pvp * &pu;
    let eig = hilbert::sym_eig(&((&m + m.transpose()) * 0.5)).unwrap();
    eig.values[0]
}

#[test]
fn criterion_08_angle_identities() {
    let mut r = rng(808);
    let (mut worst_nu, mut worst_gamma, mut worst_ambient): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut with_intersection = 0;
    let mut checked_gamma = 0;
    for i in 0..100 {
        let g = if i % 2 == 0 { intersecting_geometry(&mut r, 14) } else { random_geometry(&mut r, 14, 7) };
        let p = problem(&g);
        let q = &p.projector;
        let u = g.canonicalize().u_space().basis().clone();
        let v = g.w_space().basis().clone();
        let v_perp = AffineSubspace::from_orthonormal(hilbert::orthogonal_complement(&v).unwrap(), &Vector::zeros(g.ambient_dim()));
        let u_space = AffineSubspace::from_orthonormal(u.clone(), &Vector::zeros(g.ambient_dim()));
        let v_space = AffineSubspace::from_orthonormal(v.clone(), &Vector::zeros(g.ambient_dim()));

        worst_nu = worst_nu.max((q.norm() - angles::min_angle_cos(&u_space, &v_perp)).abs());
        worst_ambient = worst_ambient.max((q.norm().powi(2) - ambient_norm_sq_oracle(&u, &v)).abs());

        let (cos_f, j) = angles::friedrichs_cos(&u_space, &v_space, common::TOL).unwrap();
        if j >= 1 {
            with_intersection += 1;
        }
        // Q = 0 means U ⊂ V: no nonzero singular value exists, so the
        // identity has nothing to compare.
        if q.norm() > 0.0 {
            let sin_f = (1.0 - cos_f * cos_f).max(0.0).sqrt();
            worst_gamma = worst_gamma.max((q.reduced_min_modulus() - sin_f).abs());
            checked_gamma += 1;
        }
    }
    report(
        8,
        "angle identities",
        worst_nu <= 1e-10 && worst_ambient <= 1e-10 && worst_gamma <= 1e-7 && with_intersection >= 1,
        &format!(
            "100 geometries ({with_intersection} with dim(U∩V) >= 1): norm gap {worst_nu:.2e} (squared norm vs ambient oracle {worst_ambient:.2e}), gamma gap {worst_gamma:.2e} over {checked_gamma}"
        ),
    );
}

#[test]
fn criterion_09_limit_formula() {
    let mut r = rng(909);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    while count < 50 {
        let g = intersecting_geometry(&mut r, 14).canonicalize();
        let p = problem(&g);
        let q = &p.projector;
        if q.nullspace_basis().ncols() == 0 || q.reduced_min_modulus() < 0.05 {
            continue;
        }
        count += 1;
        let d = g.ambient_dim();
        let u_space = g.u_space().clone();
        let v_space = g.w_space().direction();
        let parts = angles::friedrichs_parts(&u_space, &v_space, common::TOL).unwrap();

        // Q is injective on U' = U ∩ (U∩V)^⊥; solve its normal equations there.
        let v = v_space.basis();
        let qr = (Matrix::identity(d, d) - v * v.transpose()) * &parts.a_reduced;
        let w = g.w();
        let normal = qr.transpose() * &qr;
        let rhs = qr.transpose() * w;
        let x = normal.cholesky().expect("normal equations are positive definite").solve(&rhs);
        let s = &parts.a_reduced * x;

        let ls_set = AffineSubspace::from_orthonormal(parts.intersection.clone(), &s);
        let u0 = point_in_u(&mut r, &p);
        let direct = ls_set.project(&u0).unwrap();
        let formula = q.limit_point(w, &u0).unwrap();
        worst = worst.max((direct - formula).norm() / u0.norm().max(1.0));
    }
    report(
        9,
        "limit formula",
        worst <= 1e-10,
        &format!("50 problems with nontrivial N(Q), max gap {worst:.2e}"),
    );
}

/// Singular values 1, 0.8 and 0.5, so `ν = 1`.
fn stall_problem() -> (altproj::Problem, Vector) {
    let g = generate::controlled_angle(&[std::f64::consts::FRAC_PI_2, 0.8f64.asin(), 0.5f64.asin()], 0.1).unwrap();
    let u0 = Vector::from_column_slice(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    (problem(&g), u0)
}

#[test]
fn criterion_10_stalling_outside_class() {
    let (p, u0) = stall_problem();
    assert!((p.angles.nu - 1.0).abs() < 1e-15);
    let full = RunOptions {
        stall_window: None,
        ..RunOptions::with_limits(100_000, 0.0)
    };

    // The sequence 2 - 2^-n taken from n = 1. From n = 0 its first value is
    // exactly 1, which removes the singular-value-1 component in one step.
    let geometric = Schedule::GeometricToTwo { ratio: 0.5, start: 1 };
    let t = engine::run_alternating(&p, &geometric, &u0, &full).unwrap();
    let e0 = t.error_norms[0];
    let ratio = t.final_error() / e0;
    let stalled = engine::run_alternating(&p, &geometric, &u0, &RunOptions::with_limits(100_000, 1e-10)).unwrap();

    let harmonic = Schedule::HarmonicToTwo { start: 1 };
    let h = engine::run_alternating(&p, &harmonic, &u0, &full).unwrap();

    let literal = Schedule::GeometricToTwo { ratio: 0.5, start: 0 };
    let l = engine::run_alternating(&p, &literal, &u0, &full).unwrap();

    let verdict = schedule::diagnose(&geometric, 1.0, &Default::default()).unwrap().verdict;
    report(
        10,
        "stalling outside the class",
        t.steps() == 100_000
            && ratio >= 0.1
            && stalled.stop_reason == StopReason::Stalled
            && h.final_error() < 1e-3
            && verdict == schedule::Verdict::ConvergesNumerically,
        &format!(
            "2 - 2^-n (n >= 1): final/initial = {ratio:.4} after {} steps, default run stops {:?} at {}; 2 - 1/(n+1): final {:.1e}; \
             n >= 0 indexing for reference: final/initial = {:.1e}",
            t.steps(),
            stalled.stop_reason,
            stalled.steps(),
            h.final_error(),
            l.final_error() / l.error_norms[0]
        ),
    );
}

#[test]
fn criterion_11_product_sum_bound() {
    let mut r = rng(1111);
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in 0..1000 {
        // mix uniform draws with draws crowded near 0, 1 and 2
        let s: Vec<f64> = (0..200)
            .map(|_| {
                let x: f64 = r.random();
                match k % 4 {
                    0 => 2.0 * x,
                    1 => x.powi(8) * 0.05,
                    2 => 2.0 - x.powi(8) * 0.05,
                    _ => 1.0 + (x - 0.5) * 0.1,
                }
            })
            .collect();
        let (_, prod) = schedule::sum_product_check(&s, 200).unwrap();
        let bound = schedule::product_upper_bound(&s, 200).unwrap();
        // independent log-space evaluation
        let log_prod: f64 = s.iter().map(|x| (1.0 - x).abs().ln()).sum();
        let log_bound: f64 = -s.iter().map(|x| x.min(2.0 - x)).sum::<f64>();
        assert!(log_prod <= log_bound + 1e-12 * log_bound.abs().max(1.0));
        if bound > 0.0 {
            worst = worst.max((prod - bound) / bound);
        } else {
            assert_eq!(prod, 0.0);
        }
    }
    report(
        11,
        "product bound",
        worst <= 1e-12,
        &format!("1000 sequences of length 200, max (product - bound)/bound = {worst:.2e}"),
    );
}

#[test]
fn criterion_12_truncation_growth() {
    let dims = [10, 100, 1000, 10_000];
    let rows = studies::truncation_study(1.0, 0.6, &dims, &Schedule::Constant { alpha: 1.0 }, 1000).unwrap();
    let norms: Vec<f64> = rows.iter().map(|r| r.limit_norm).collect();
    let increasing = norms.windows(2).all(|w| w[1] > w[0]);
    let grows = norms[3] > 10.0 * norms[0];
    let closed = rows.iter().all(|r| (r.limit_norm - r.closed_form).abs() <= 1e-12 * r.closed_form);
    // integral comparison: d^1.8/1.8 <= Σ_{i≤d} i^0.8 <= d^1.8/1.8 + d^0.8
    let sandwich = rows.iter().all(|r| {
        let d = r.d as f64;
        let sq = r.limit_norm * r.limit_norm;
        let lo = d.powf(1.8) / 1.8;
        sq >= lo && sq <= lo + d.powf(0.8)
    });
    // dense pseudo-inverse at d = 10
    let (sigma, w) = studies::truncation_data(1.0, 0.6, 10);
    let dense = hilbert::pinv(&Matrix::from_diagonal(&Vector::from_vec(sigma)), 1e-12).unwrap() * Vector::from_vec(w);
    let dense_ok = (dense.norm() - norms[0]).abs() <= 1e-12 * norms[0];
    report(
        12,
        "truncation growth",
        increasing && grows && closed && sandwich && dense_ok,
        &format!(
            "||Q_d^+ w|| = {:.4}, {:.4}, {:.4}, {:.4} for d = 10..10^4 (ratio {:.1})",
            norms[0],
            norms[1],
            norms[2],
            norms[3],
            norms[3] / norms[0]
        ),
    );
}
