//! Dense symmetric positive-definite matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Smallest accepted Cholesky pivot, relative to the largest diagonal entry.
pub const PIVOT_TOL: f64 = 1e-10;

/// A symmetric positive-definite matrix together with its lower Cholesky
/// factor and log-determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPosDefMatrix {
    entries: DMatrix<f64>,
    chol: DMatrix<f64>,
    logdet: f64,
}

impl SymPosDefMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Lower-triangular factor `L` with `L L' = A`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn identity(dim: usize) -> Self {
        SymPosDefMatrix {
            entries: DMatrix::identity(dim, dim),
            chol: DMatrix::identity(dim, dim),
            logdet: 0.0,
        }
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        let mut y = DVector::zeros(n);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.chol[(i, j)] * y[j];
            }
            y[i] = s / self.chol[(i, i)];
        }
        y
    }

    /// Quadratic form `x' A^{-1} x`.
    pub fn inv_quad(&self, x: &DVector<f64>) -> f64 {
        self.solve_lower(x).norm_squared()
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn submatrix(&self, idx: &[usize]) -> Result<SymPosDefMatrix> {
        let k = idx.len();
        let sub = DMatrix::from_fn(k, k, |i, j| self.entries[(idx[i], idx[j])]);
        chol_decompose(&sub)
    }
}

/// Cholesky factorization with explicit symmetry and pivot checks.
///
/// A pivot at or below `PIVOT_TOL` times the largest diagonal entry is
/// rejected as numerically singular; no jitter is ever added.
pub fn chol_decompose(a: &DMatrix<f64>) -> Result<SymPosDefMatrix> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let n = rows;
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric { row: i, col: j, diff });
            }
        }
    }

    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)]));
    let floor = PIVOT_TOL * max_diag.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= floor {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            // lower triangle of the symmetrized input
            let mut s = 0.5 * (a[(i, j)] + a[(j, i)]);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    let logdet = 2.0 * (0..n).map(|i| l[(i, i)].ln()).sum::<f64>();
    let entries = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    Ok(SymPosDefMatrix {
        entries,
        chol: l,
        logdet,
    })
}

/// Symmetric square root `S` with `S S = A`, via the spectral decomposition.
pub fn sym_sqrt(a: &SymPosDefMatrix) -> DMatrix<f64> {
    spectral_power(a, 0.5)
}

/// Symmetric inverse square root `A^{-1/2}`.
pub fn sym_inv_sqrt(a: &SymPosDefMatrix) -> DMatrix<f64> {
    spectral_power(a, -0.5)
}

fn spectral_power(a: &SymPosDefMatrix, power: f64) -> DMatrix<f64> {
    let n = a.dim();
    if n == 1 {
        return DMatrix::from_element(1, 1, a.entries[(0, 0)].powf(power));
    }
    let eig = a.entries.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).powf(power)));
    let s = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    (&s + s.transpose()) * 0.5
}

/// Relative Frobenius distance `||a - b|| / max(||b||, 1e-300)`.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
