#![allow(dead_code)]

use altproj::cli::generate;
use altproj::hilbert::{self, Vector};
use altproj::{Problem, ProblemGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOL: f64 = hilbert::DEFAULT_INTERSECTION_TOL;

/// Prints one status line and fails the test if the criterion did not hold.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} ({name}): {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random geometry with `d ≤ max_d` and subspace dimensions `≤ max_k`.
pub fn random_geometry(rng: &mut ChaCha8Rng, max_d: usize, max_k: usize) -> ProblemGeometry {
    let d = rng.random_range(2..=max_d);
    let k_u = rng.random_range(1..=max_k.min(d));
    let k_w = rng.random_range(1..=max_k.min(d));
    generate::random_geometry(d, k_u, k_w, rng.random(), hilbert::DEFAULT_RANK_TOL).unwrap()
}

/// Random geometry whose direction spaces must meet: `dim U + dim W > d`.
pub fn intersecting_geometry(rng: &mut ChaCha8Rng, max_d: usize) -> ProblemGeometry {
    let d = rng.random_range(3..=max_d);
    let k_u = rng.random_range(2..=d - 1);
    let k_w = rng.random_range(d - k_u + 1..=d - 1);
    generate::random_geometry(d, k_u, k_w, rng.random(), hilbert::DEFAULT_RANK_TOL).unwrap()
}

pub fn problem(g: &ProblemGeometry) -> Problem {
    Problem::new(g, TOL).unwrap()
}

/// Gaussian point of `U` (canonical coordinates).
pub fn point_in_u(rng: &mut ChaCha8Rng, p: &Problem) -> Vector {
    let b = p.projector.domain_basis();
    b * generate::gaussian_vector(rng, b.ncols())
}
