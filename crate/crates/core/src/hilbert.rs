//! Dense real linear algebra on `R^d`.
//!
//! Everything else in the crate is expressed with the [`Vector`] and
//! [`Matrix`] aliases defined here. Storage and the symmetric eigensolver come
//! from `nalgebra`; the SVD is a one-sided Jacobi sweep, which is accurate for
//! the small structured matrices (projectors, cross-Gram matrices of bases)
//! this crate feeds it. The module also fixes the conventions the rest of the
//! crate relies on: nonincreasing spectra, well-defined empty shapes, and a
//! single relative tolerance for rank decisions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative cutoff used for rank decisions (orthonormalization, pinv).
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Cosine slack for declaring a principal direction part of an intersection.
pub const DEFAULT_INTERSECTION_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;

/// Thin singular value decomposition `m = u * diag(s) * v_t`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub singular_values: Vec<f64>,
    pub v_t: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * &self.v_t
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol` times the largest one.
    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.max_singular_value();
        self.singular_values
            .iter()
            .filter(|&&s| s > cutoff && s > 0.0)
            .count()
    }
}

/// Symmetric eigendecomposition with eigenvalues in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored column-wise, matching `values`.
    pub vectors: Matrix,
}

impl SymEig {
    pub fn reconstruct(&self) -> Matrix {
        let mut scaled = self.vectors.clone();
        for (j, l) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*l);
        }
        scaled * self.vectors.transpose()
    }
}

pub fn ensure_finite_vec(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

pub fn ensure_finite_mat(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Builds a `dim x cols.len()` matrix whose columns are the given vectors.
pub fn from_columns(dim: usize, cols: &[Vec<f64>]) -> Result<Matrix> {
    for c in cols {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.len(),
            });
        }
    }
    Ok(Matrix::from_fn(dim, cols.len(), |i, j| cols[j][i]))
}

/// Thin SVD with singular values sorted in nonincreasing order.
///
/// Empty shapes are allowed and produce empty factors.
pub fn svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: Matrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v_t: Matrix::zeros(0, cols),
        };
    }
    if rows < cols {
        // m^T = u' s v'^T  gives  m = v' s u'^T
        let t = jacobi_svd(&m.transpose());
        return Svd {
            u: t.v_t.transpose(),
            singular_values: t.singular_values,
            v_t: t.u.transpose(),
        };
    }
    jacobi_svd(m)
}

const JACOBI_MAX_SWEEPS: usize = 60;

// One-sided Jacobi on a tall matrix: rotate column pairs until all columns are
// mutually orthogonal; their norms are then the singular values.
fn jacobi_svd(m: &Matrix) -> Svd {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = Matrix::identity(cols, cols);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let smax = singular_values[0];

    // Columns with negligible norm carry no direction information; their left
    // vectors are replaced by a completion of the others.
    let negligible = (rows as f64) * f64::EPSILON * smax;
    let mut u = Matrix::zeros(rows, cols);
    let mut filled = 0;
    for (k, &i) in order.iter().enumerate() {
        if norms[i] > negligible {
            u.set_column(k, &(a.column(i) / norms[i]));
            filled = k + 1;
        }
    }
    complete_columns(&mut u, filled);
    let v_t = Matrix::from_fn(cols, cols, |r, c| v[(c, order[r])]);
    Svd {
        u,
        singular_values,
        v_t,
    }
}

fn rotate_columns(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, p)], m[(r, q)]);
        m[(r, p)] = c * x - s * y;
        m[(r, q)] = s * x + c * y;
    }
}

// Fills columns `filled..` of `u` with unit vectors orthogonal to all earlier
// columns. Each new column is the standard basis vector with the largest
// residual after (twice-iterated) Gram-Schmidt, which is never below
// `sqrt((rows - k) / rows)`.
fn complete_columns(u: &mut Matrix, filled: usize) {
    let (rows, cols) = u.shape();
    for k in filled..cols {
        let mut best = Vector::zeros(rows);
        let mut best_norm = -1.0;
        for e in 0..rows {
            let mut x = Vector::zeros(rows);
            x[e] = 1.0;
            for _ in 0..2 {
                for j in 0..k {
                    let proj = u.column(j).dot(&x);
                    x -= u.column(j) * proj;
                }
            }
            let n = x.norm();
            if n > best_norm {
                best_norm = n;
                best = x;
            }
        }
        u.set_column(k, &(best / best_norm));
    }
}

// Column sign convention: the first entry whose magnitude is at least half of
// the column's largest magnitude is made positive.
fn fix_signs(m: &mut Matrix) {
    for mut col in m.column_iter_mut() {
        let peak = col.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        if let Some(lead) = col.iter().copied().find(|x| x.abs() >= 0.5 * peak) {
            if lead < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Orthonormal basis of the column space of `columns`.
///
/// Singular values at or below `tol` times the largest one are treated as
/// zero, so rank-deficient input yields fewer columns. A zero-column input
/// yields a `dim x 0` basis.
pub fn orthonormalize(columns: &Matrix, tol: f64) -> Result<Matrix> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    ensure_finite_mat(columns, "orthonormalize input")?;
    let dec = svd(columns);
    let rank = dec.rank(tol);
    let mut basis = dec.u.columns(0, rank).into_owned();
    fix_signs(&mut basis);
    Ok(basis)
}

/// Orthonormal basis of the orthogonal complement of the span of an
/// orthonormal `basis` in `R^d`.
///
/// The singular values of `I - BB^T` are 0 or 1 up to rounding, so they are
/// split at 1/2 rather than relative to the largest one (which would break
/// down when `B` spans everything and the projector is pure rounding noise).
pub fn orthogonal_complement(basis: &Matrix) -> Result<Matrix> {
    ensure_finite_mat(basis, "complement input")?;
    let d = basis.nrows();
    let projector = Matrix::identity(d, d) - basis * basis.transpose();
    let dec = svd(&projector);
    let rank = dec.singular_values.iter().filter(|&&s| s > 0.5).count();
    let mut comp = dec.u.columns(0, rank).into_owned();
    fix_signs(&mut comp);
    Ok(comp)
}

/// Moore-Penrose pseudo-inverse, truncating singular values at or below
/// `tol` times the largest one.
pub fn pinv(m: &Matrix, tol: f64) -> Result<Matrix> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    ensure_finite_mat(m, "pinv input")?;
    let (rows, cols) = m.shape();
    let dec = svd(m);
    let rank = dec.rank(tol);
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..rank {
        let s = dec.singular_values[k];
        // v_k * u_k^T / s_k
        let v = dec.v_t.row(k).transpose();
        let u = dec.u.column(k);
        out += (v * u.transpose()) / s;
    }
    Ok(out)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues nonincreasing.
///
/// Input whose relative asymmetry exceeds `1e-12` (Frobenius) is rejected.
pub fn sym_eig(m: &Matrix) -> Result<SymEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    ensure_finite_mat(m, "sym_eig input")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEig {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let asym = (m - m.transpose()).norm();
    let scale = m.norm();
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym / scale));
    }
    let sym = (m + m.transpose()) * 0.5;
    let dec = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
    let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| dec.eigenvectors[(r, order[c])]);
    Ok(SymEig { values, vectors })
}
