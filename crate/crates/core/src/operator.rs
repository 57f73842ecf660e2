//! The restricted projection `Q = P_{V^⊥}|_U : U → V^⊥`, its adjoint
//! `Q* = P_U|_{V^⊥}`, and the least-squares data the iteration converges to.
//!
//! `Q` is stored in orthonormal coordinates of `U` (domain) and `V^⊥`
//! (codomain), so its singular values are exactly the sines of the principal
//! angles between `U` and `V` (and the cosines between `U` and `V^⊥`).

use crate::error::{Error, Result};
use crate::hilbert::{self, Matrix, Vector};
use crate::subspace::{AffineSubspace, ProblemGeometry};

/// Singular values of `Q` at or below this value are treated as zero.
///
/// A singular value `σ` of `Q` is the sine of a principal angle whose cosine
/// is `sqrt(1 - σ²)`; the cutoff is the sine matching the angle module's
/// intersection rule `cos ≥ 1 - tol`, so both modules agree on `N(Q) = U ∩ V`.
pub fn null_cutoff(tol: f64) -> f64 {
    (tol * (2.0 - tol)).max(0.0).sqrt()
}

#[derive(Debug, Clone)]
pub struct RestrictedProjector {
    matrix: Matrix,
    domain_basis: Matrix,
    codomain_basis: Matrix,
    norm: f64,
    reduced_min_modulus: f64,
    singular_values: Vec<f64>,
    /// Orthonormal basis of `N(Q)` in ambient coordinates.
    nullspace_basis: Matrix,
    /// Orthonormal basis of `N(Q)^⊥ ⊂ U` in domain coordinates.
    range_coords: Matrix,
    pinv: Matrix,
    tol: f64,
}

/// The least-squares solution set `U_{Q,w} = Q†w + N(Q)`.
#[derive(Debug, Clone)]
pub struct LeastSquaresSet {
    pub min_norm_solution: Vector,
    pub nullspace_basis: Matrix,
    /// `inf_{u ∈ U} ||w - Qu||`.
    pub residual_norm: f64,
    /// `||Q*Q x - Q*w||` at `x = Q†w`.
    pub normal_equation_residual: f64,
}

impl LeastSquaresSet {
    pub fn as_affine(&self) -> AffineSubspace {
        AffineSubspace::from_orthonormal(self.nullspace_basis.clone(), &self.min_norm_solution)
    }
}

impl RestrictedProjector {
    /// Builds `Q` for a canonical geometry. `tol` is the intersection tolerance
    /// shared with [`crate::angles`].
    pub fn build(g: &ProblemGeometry, tol: f64) -> Result<Self> {
        if !g.is_canonical() {
            return Err(Error::invalid("geometry must be canonicalized (U through the origin)"));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::invalid(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        let domain_basis = g.u_space().basis().clone();
        let codomain_basis = hilbert::orthogonal_complement(g.w_space().basis())?;
        let matrix = codomain_basis.transpose() * &domain_basis;
        let k_u = domain_basis.ncols();

        let dec = hilbert::svd(&matrix);
        let cutoff = null_cutoff(tol);
        let singular_values = dec.singular_values.clone();
        let norm = singular_values.first().copied().unwrap_or(0.0);
        let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
        let reduced_min_modulus = if rank == 0 { 0.0 } else { singular_values[rank - 1] };

        // Right singular vectors, completed to a basis of the domain
        // coordinates; the completion spans directions annihilated by Q.
        let right = dec.v_t.transpose();
        let range_coords = right.columns(0, rank).into_owned();
        let null_coords = hilbert::orthogonal_complement(&range_coords)?;
        debug_assert_eq!(range_coords.ncols() + null_coords.ncols(), k_u);
        let nullspace_basis = &domain_basis * null_coords;

        let pinv = if rank == 0 {
            Matrix::zeros(k_u, codomain_basis.ncols())
        } else {
            hilbert::pinv(&matrix, cutoff / norm)?
        };

        Ok(Self {
            matrix,
            domain_basis,
            codomain_basis,
            norm,
            reduced_min_modulus,
            singular_values,
            nullspace_basis,
            range_coords,
            pinv,
            tol,
        })
    }

    /// Coordinates of `Q` (rows: `V^⊥` basis, columns: `U` basis).
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn domain_basis(&self) -> &Matrix {
        &self.domain_basis
    }

    pub fn codomain_basis(&self) -> &Matrix {
        &self.codomain_basis
    }

    /// `||Q||`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `γ(Q)`, the smallest singular value above the null cutoff (0 if `Q = 0`).
    pub fn reduced_min_modulus(&self) -> f64 {
        self.reduced_min_modulus
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn nullspace_basis(&self) -> &Matrix {
        &self.nullspace_basis
    }

    /// Basis of `N(Q)^⊥` (inside `U`) in domain coordinates.
    pub fn range_coords(&self) -> &Matrix {
        &self.range_coords
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain_basis.nrows()
    }

    fn check(&self, v: &Vector) -> Result<()> {
        if v.len() == self.ambient_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: v.len(),
            })
        }
    }

    /// `Q u = P_{V^⊥} u` for `u ∈ U`, in ambient coordinates.
    pub fn apply(&self, u: &Vector) -> Result<Vector> {
        self.check(u)?;
        let coords = self.domain_basis.transpose() * u;
        Ok(&self.codomain_basis * (&self.matrix * coords))
    }

    /// `Q* v = P_U v` for `v ∈ V^⊥`, in ambient coordinates.
    pub fn adjoint_apply(&self, v: &Vector) -> Result<Vector> {
        self.check(v)?;
        let coords = self.codomain_basis.transpose() * v;
        Ok(&self.domain_basis * (self.matrix.transpose() * coords))
    }

    /// `Q*Q u`.
    pub fn gram_apply(&self, u: &Vector) -> Result<Vector> {
        self.adjoint_apply(&self.apply(u)?)
    }

    /// `T = Q*Q` in domain coordinates.
    pub fn gram_coords(&self) -> Matrix {
        self.matrix.transpose() * &self.matrix
    }

    /// `Q† v` for `v ∈ V^⊥`, in ambient coordinates.
    pub fn pinv_apply(&self, v: &Vector) -> Result<Vector> {
        self.check(v)?;
        let coords = self.codomain_basis.transpose() * v;
        Ok(&self.domain_basis * (&self.pinv * coords))
    }

    /// `P_{N(Q)} u`.
    pub fn project_nullspace(&self, u: &Vector) -> Result<Vector> {
        self.check(u)?;
        Ok(&self.nullspace_basis * (self.nullspace_basis.transpose() * u))
    }

    /// Relative size of the component of `u` lying outside `U`.
    pub fn distance_from_domain(&self, u: &Vector) -> f64 {
        let inside = &self.domain_basis * (self.domain_basis.transpose() * u);
        (u - inside).norm() / u.norm().max(1.0)
    }

    fn check_in_codomain(&self, w: &Vector) -> Result<()> {
        self.check(w)?;
        let inside = &self.codomain_basis * (self.codomain_basis.transpose() * w);
        let off = (w - inside).norm() / w.norm().max(1.0);
        if off > 1e-10 {
            return Err(Error::invalid(format!("w is not in V^⊥ (relative offset {off:.3e})")));
        }
        Ok(())
    }

    /// Least-squares solutions of `Qu = w` in `U`.
    pub fn least_squares_set(&self, w: &Vector) -> Result<LeastSquaresSet> {
        self.check_in_codomain(w)?;
        let x = self.pinv_apply(w)?;
        let residual_norm = (w - self.apply(&x)?).norm();
        let normal_equation_residual = (self.gram_apply(&x)? - self.adjoint_apply(w)?).norm();
        Ok(LeastSquaresSet {
            min_norm_solution: x,
            nullspace_basis: self.nullspace_basis.clone(),
            residual_norm,
            normal_equation_residual,
        })
    }

    /// `Q†w + P_{N(Q)} u0`, the point of `U_{Q,w}` nearest to `u0`.
    pub fn limit_point(&self, w: &Vector, u0: &Vector) -> Result<Vector> {
        self.check_in_codomain(w)?;
        self.check(u0)?;
        let off = self.distance_from_domain(u0);
        if off > 1e-10 {
            return Err(Error::invalid(format!("u0 is not in U (relative offset {off:.3e})")));
        }
        Ok(self.pinv_apply(w)? + self.project_nullspace(u0)?)
    }

    /// `||w - Qu||`.
    pub fn residual(&self, w: &Vector, u: &Vector) -> Result<f64> {
        Ok((w - self.apply(u)?).norm())
    }
}

/// `d(u, W) = ||u - P_W u||`.
pub fn distance_to_w(g: &ProblemGeometry, u: &Vector) -> Result<f64> {
    g.w_space().distance(u)
}
