//! Closed affine subspaces of `R^d` and their (relaxed) orthogonal projections.

use crate::error::{Error, Result};
use crate::hilbert::{self, Matrix, Vector};

/// An affine subspace `offset + span(basis)`.
///
/// The basis has orthonormal columns and the stored offset is canonical: it is
/// the point of the subspace closest to the origin, hence orthogonal to the
/// direction space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSubspace {
    basis: Matrix,
    offset: Vector,
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

impl AffineSubspace {
    /// Builds `point + span(spanning)`. The spanning set need not be
    /// independent; its rank is decided with the relative tolerance `tol`.
    pub fn new(spanning: &Matrix, point: &Vector, tol: f64) -> Result<Self> {
        check_dim(spanning.nrows(), point.len())?;
        hilbert::ensure_finite_vec(point, "subspace offset")?;
        let basis = hilbert::orthonormalize(spanning, tol)?;
        Ok(Self::from_orthonormal(basis, point))
    }

    /// Linear subspace `span(spanning)`.
    pub fn linear(spanning: &Matrix, tol: f64) -> Result<Self> {
        Self::new(spanning, &Vector::zeros(spanning.nrows()), tol)
    }

    /// Wraps an already orthonormal basis; the offset is canonicalized.
    pub fn from_orthonormal(basis: Matrix, point: &Vector) -> Self {
        let offset = point - &basis * (basis.transpose() * point);
        Self { basis, offset }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Canonical offset `P_A 0`.
    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn is_linear(&self) -> bool {
        self.offset.iter().all(|&x| x == 0.0)
    }

    /// The direction space (this subspace translated through the origin).
    pub fn direction(&self) -> AffineSubspace {
        Self {
            basis: self.basis.clone(),
            offset: Vector::zeros(self.ambient_dim()),
        }
    }

    /// Orthogonal complement of the direction space, as a linear subspace.
    pub fn direction_complement(&self) -> Result<AffineSubspace> {
        let comp = hilbert::orthogonal_complement(&self.basis)?;
        Ok(Self::from_orthonormal(comp, &Vector::zeros(self.ambient_dim())))
    }

    /// `A + s`.
    pub fn translate(&self, s: &Vector) -> Result<AffineSubspace> {
        check_dim(self.ambient_dim(), s.len())?;
        Ok(Self::from_orthonormal(self.basis.clone(), &(&self.offset + s)))
    }

    /// Orthogonal projection onto the direction space, `B B^T u`.
    pub fn project_direction(&self, u: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), u.len())?;
        Ok(&self.basis * (self.basis.transpose() * u))
    }

    /// Orthogonal projection onto the complement of the direction space.
    pub fn project_direction_perp(&self, u: &Vector) -> Result<Vector> {
        Ok(u - self.project_direction(u)?)
    }

    /// `P_A u = c + B B^T (u - c)`.
    pub fn project(&self, u: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim(), u.len())?;
        let shifted = u - &self.offset;
        Ok(&self.offset + &self.basis * (self.basis.transpose() * shifted))
    }

    /// `P_A^alpha u = u + alpha (P_A u - u)`; `alpha = 2` is the reflection.
    pub fn project_relaxed(&self, u: &Vector, alpha: f64) -> Result<Vector> {
        if !(alpha >= 0.0) {
            return Err(Error::invalid(format!("relaxation must be nonnegative, got {alpha}")));
        }
        if alpha == 1.0 {
            return self.project(u);
        }
        let p = self.project(u)?;
        Ok(u + (p - u) * alpha)
    }

    /// `d(u, A) = ||u - P_A u||`.
    pub fn distance(&self, u: &Vector) -> Result<f64> {
        Ok((u - self.project(u)?).norm())
    }

    pub fn contains(&self, u: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(u)? <= tol * u.norm().max(1.0))
    }
}

/// Returns `(P_{A+s} u, P_A(u - s) + s)`; the two agree for every `A`, `s`, `u`.
pub fn translate_identity_check(
    a: &AffineSubspace,
    s: &Vector,
    u: &Vector,
) -> Result<(Vector, Vector)> {
    let shifted = a.translate(s)?;
    let direct = shifted.project(u)?;
    let via_shift = a.project(&(u - s))? + s;
    Ok((direct, via_shift))
}

/// The pair `(U, W)` on which the iteration runs.
///
/// After [`ProblemGeometry::canonicalize`], `U` passes through the origin and
/// `W = V + w` with `V` the direction space of `W` and `w = P_W 0 ∈ V^⊥`.
#[derive(Debug, Clone)]
pub struct ProblemGeometry {
    u_space: AffineSubspace,
    w_space: AffineSubspace,
    /// Translation that maps canonical coordinates back to the original ones.
    translation: Vector,
}

impl ProblemGeometry {
    pub fn new(u_space: AffineSubspace, w_space: AffineSubspace) -> Result<Self> {
        check_dim(u_space.ambient_dim(), w_space.ambient_dim())?;
        let d = u_space.ambient_dim();
        Ok(Self {
            u_space,
            w_space,
            translation: Vector::zeros(d),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.u_space.ambient_dim()
    }

    pub fn u_space(&self) -> &AffineSubspace {
        &self.u_space
    }

    pub fn w_space(&self) -> &AffineSubspace {
        &self.w_space
    }

    /// Original-coordinates point = canonical point + translation.
    pub fn translation(&self) -> &Vector {
        &self.translation
    }

    pub fn is_canonical(&self) -> bool {
        self.u_space.is_linear()
    }

    /// Shifts both subspaces by `-P_U 0` so that `U` becomes linear.
    pub fn canonicalize(&self) -> ProblemGeometry {
        if self.is_canonical() {
            return self.clone();
        }
        let shift = self.u_space.offset().clone();
        let u_space = self.u_space.direction();
        let w_space =
            AffineSubspace::from_orthonormal(self.w_space.basis().clone(), &(self.w_space.offset() - &shift));
        ProblemGeometry {
            u_space,
            w_space,
            translation: &self.translation + shift,
        }
    }

    /// Maps a point given in canonical coordinates back to the original frame.
    pub fn to_original(&self, u: &Vector) -> Vector {
        u + &self.translation
    }

    /// `w = P_W 0`, the canonical offset of `W`.
    pub fn w(&self) -> &Vector {
        self.w_space.offset()
    }

    /// `P_{V^⊥} u` where `V` is the direction space of `W`.
    pub fn project_v_perp(&self, u: &Vector) -> Result<Vector> {
        self.w_space.project_direction_perp(u)
    }

    /// Relaxed projection onto `W` written as `u + alpha (w - P_{V^⊥} u)`.
    pub fn relaxed_w_projection_formula(&self, u: &Vector, alpha: f64) -> Result<Vector> {
        let perp = self.project_v_perp(u)?;
        Ok(u + (self.w() - perp) * alpha)
    }
}
