//! Geometry constructors for experiments: controlled principal angles,
//! Gaussian random subspaces, and random rigid rotations of either.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hilbert::{self, Matrix, Vector};
use crate::subspace::{AffineSubspace, ProblemGeometry};

/// `U = span{e_1..e_k}` and `W = W₀ + offset` in `R^{2k+1}`, where
/// `W₀ = span{cos φ_i e_i + sin φ_i e_{k+i}}`.
///
/// The principal angles between `U` and `W₀` are exactly the `φ_i`
/// (radians, each in `[0, π/2]`), so `||Q|| = max sin φ_i` and the nonzero
/// singular values of `Q` are the nonzero `sin φ_i`. The offset has length
/// `offset_norm` along `Σ(-sin φ_i e_i + cos φ_i e_{k+i}) + e_{2k+1}`, which is
/// orthogonal to `W₀` and has a component outside `U + W₀`, so the two affine
/// subspaces do not meet once `offset_norm > 0`.
pub fn controlled_angle(angles: &[f64], offset_norm: f64) -> Result<ProblemGeometry> {
    if angles.is_empty() {
        return Err(Error::invalid("at least one principal angle is required"));
    }
    if let Some(a) = angles.iter().find(|a| !(0.0..=std::f64::consts::FRAC_PI_2).contains(*a)) {
        return Err(Error::invalid(format!("principal angles must lie in [0, π/2], got {a}")));
    }
    if !(offset_norm.is_finite() && offset_norm >= 0.0) {
        return Err(Error::invalid(format!("offset norm must be finite and >= 0, got {offset_norm}")));
    }
    let k = angles.len();
    let d = 2 * k + 1;
    let mut u = Matrix::zeros(d, k);
    let mut w = Matrix::zeros(d, k);
    let mut offset = Vector::zeros(d);
    for (i, &phi) in angles.iter().enumerate() {
        let (s, c) = phi.sin_cos();
        u[(i, i)] = 1.0;
        w[(i, i)] = c;
        w[(k + i, i)] = s;
        offset[i] = -s;
        offset[k + i] = c;
    }
    offset[d - 1] = 1.0;
    let offset = offset.normalize() * offset_norm;
    // Both spanning sets are already orthonormal.
    ProblemGeometry::new(
        AffineSubspace::from_orthonormal(u, &Vector::zeros(d)),
        AffineSubspace::from_orthonormal(w, &offset),
    )
}

/// Same as [`controlled_angle`] with angles in degrees.
pub fn controlled_angle_deg(angles_deg: &[f64], offset_norm: f64) -> Result<ProblemGeometry> {
    let rad: Vec<f64> = angles_deg.iter().map(|a| a.to_radians()).collect();
    controlled_angle(&rad, offset_norm)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, len: usize) -> Vector {
    Vector::from_fn(len, |_, _| StandardNormal.sample(rng))
}

/// Two affine subspaces of `R^dim` with Gaussian spanning sets and offsets.
///
/// Gaussian spanning sets have full rank almost surely, so the subspaces
/// have dimensions `dim_u` and `dim_w` (capped at `dim`).
pub fn random_geometry(dim: usize, dim_u: usize, dim_w: usize, seed: u64, rank_tol: f64) -> Result<ProblemGeometry> {
    if dim == 0 {
        return Err(Error::invalid("ambient dimension must be at least 1"));
    }
    if dim_u > dim || dim_w > dim {
        return Err(Error::invalid(format!(
            "subspace dimensions ({dim_u}, {dim_w}) exceed ambient dimension {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let su = gaussian_matrix(&mut rng, dim, dim_u);
    let sw = gaussian_matrix(&mut rng, dim, dim_w);
    let pu = gaussian_vector(&mut rng, dim);
    let pw = gaussian_vector(&mut rng, dim);
    ProblemGeometry::new(
        AffineSubspace::new(&su, &pu, rank_tol)?,
        AffineSubspace::new(&sw, &pw, rank_tol)?,
    )
}

/// A Haar-ish random orthogonal matrix: the orthonormalized columns of a
/// Gaussian square matrix.
pub fn random_rotation(dim: usize, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g = gaussian_matrix(&mut rng, dim, dim);
        let q = hilbert::orthonormalize(&g, hilbert::DEFAULT_RANK_TOL)?;
        if q.ncols() == dim {
            return Ok(q);
        }
    }
}

/// Applies the rigid motion `x ↦ R x` to both subspaces. Angles, `||Q||`,
/// `γ(Q)` and distances are unchanged.
pub fn rotate(g: &ProblemGeometry, r: &Matrix) -> Result<ProblemGeometry> {
    let d = g.ambient_dim();
    if r.shape() != (d, d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.nrows(),
        });
    }
    let moved = |a: &AffineSubspace| AffineSubspace::from_orthonormal(r * a.basis(), &(r * a.offset()));
    ProblemGeometry::new(moved(g.u_space()), moved(g.w_space()))
}
