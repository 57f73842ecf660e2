//! Principal angles between subspaces, and the two scalars that govern the
//! iteration: `nu = cos θ_min(U₀, W₀^⊥)` and `gamma = sin θ_F(U₀, W₀)`.
//!
//! Conventions for trivial spaces: a cosine taken over an empty family is 0.
//! In particular `gamma = 1` whenever one direction space contains the other,
//! since nothing is left once the intersection is removed.

use serde::Serialize;

use crate::error::Result;
use crate::hilbert::{self, Matrix};
use crate::subspace::{AffineSubspace, ProblemGeometry};

#[derive(Debug, Clone, Serialize)]
pub struct AngleReport {
    /// Principal cosines between `U₀` and `W₀`, nonincreasing.
    pub principal_cosines: Vec<f64>,
    /// `cos θ_min(U₀, W₀)`.
    pub theta_min_cos: f64,
    /// `cos θ_F(U₀, W₀)`.
    pub friedrichs_cos: f64,
    pub nu: f64,
    pub gamma: f64,
    /// `dim(U₀ ∩ W₀)`.
    pub intersection_dim: usize,
    pub tol: f64,
}

/// Friedrichs cosine together with the decomposition it was computed from.
#[derive(Debug, Clone)]
pub struct FriedrichsParts {
    pub cos: f64,
    /// Orthonormal basis of `J = A ∩ B`.
    pub intersection: Matrix,
    /// Orthonormal basis of `A ∩ J^⊥`.
    pub a_reduced: Matrix,
    /// Orthonormal basis of `B ∩ J^⊥`.
    pub b_reduced: Matrix,
}

impl FriedrichsParts {
    pub fn intersection_dim(&self) -> usize {
        self.intersection.ncols()
    }
}

/// Singular values of `aᵀ b`, clipped to `[0, 1]`, nonincreasing.
///
/// Both inputs must have orthonormal columns.
pub fn principal_cosines(a_basis: &Matrix, b_basis: &Matrix) -> Vec<f64> {
    let cross = a_basis.transpose() * b_basis;
    hilbert::svd(&cross)
        .singular_values
        .into_iter()
        .map(|c| c.clamp(0.0, 1.0))
        .collect()
}

/// `cos θ_min(A, B)`: the largest principal cosine, 0 for a trivial space.
pub fn min_angle_cos(a: &AffineSubspace, b: &AffineSubspace) -> f64 {
    principal_cosines(a.basis(), b.basis()).first().copied().unwrap_or(0.0)
}

fn complete(partial: &Matrix, dim: usize) -> Result<Matrix> {
    // `partial` has orthonormal columns in R^dim; append an orthonormal basis of
    // the rest of R^dim.
    let extra = hilbert::orthogonal_complement(partial)?;
    let mut full = Matrix::zeros(dim, partial.ncols() + extra.ncols());
    full.columns_mut(0, partial.ncols()).copy_from(partial);
    full.columns_mut(partial.ncols(), extra.ncols()).copy_from(&extra);
    Ok(full)
}

/// Splits `A` and `B` into their intersection `J` (principal pairs whose
/// cosine is at least `1 - tol`) and the reduced spaces `A ∩ J^⊥`,
/// `B ∩ J^⊥`, and returns the largest principal cosine between the latter.
pub fn friedrichs_parts(a: &AffineSubspace, b: &AffineSubspace, tol: f64) -> Result<FriedrichsParts> {
    let (ab, bb) = (a.basis(), b.basis());
    let d = a.ambient_dim();
    let dec = hilbert::svd(&(ab.transpose() * bb));
    let j = dec.singular_values.iter().take_while(|&&c| c >= 1.0 - tol).count();

    // Left/right principal coordinates, completed to full orthonormal bases of
    // the coordinate spaces; the added directions have cosine 0.
    let left = complete(&dec.u, ab.ncols())?;
    let right = complete(&dec.v_t.transpose(), bb.ncols())?;

    let intersection = ab * left.columns(0, j);
    let a_reduced = ab * left.columns(j, left.ncols() - j);
    let b_reduced = bb * right.columns(j, right.ncols() - j);
    debug_assert_eq!(intersection.nrows(), d);

    let cos = principal_cosines(&a_reduced, &b_reduced).first().copied().unwrap_or(0.0);
    Ok(FriedrichsParts {
        cos,
        intersection,
        a_reduced,
        b_reduced,
    })
}

/// `(cos θ_F(A, B), dim(A ∩ B))`.
pub fn friedrichs_cos(a: &AffineSubspace, b: &AffineSubspace, tol: f64) -> Result<(f64, usize)> {
    let parts = friedrichs_parts(a, b, tol)?;
    Ok((parts.cos, parts.intersection_dim()))
}

/// Angle summary of a canonical geometry `(U₀, W₀)`.
///
/// `tol` is the intersection tolerance; the complement `W₀^⊥` uses the
/// default rank tolerance.
pub fn compute_report(g: &ProblemGeometry, tol: f64) -> Result<AngleReport> {
    let u0 = g.u_space().direction();
    let w0 = g.w_space().direction();
    let w0_perp = w0.direction_complement()?;
    let cosines = principal_cosines(u0.basis(), w0.basis());
    let theta_min_cos = cosines.first().copied().unwrap_or(0.0);
    let (friedrichs, intersection_dim) = friedrichs_cos(&u0, &w0, tol)?;
    let nu = min_angle_cos(&u0, &w0_perp);
    let gamma = (1.0 - friedrichs * friedrichs).max(0.0).sqrt();
    Ok(AngleReport {
        principal_cosines: cosines,
        theta_min_cos,
        friedrichs_cos: friedrichs,
        nu,
        gamma,
        intersection_dim,
        tol,
    })
}
