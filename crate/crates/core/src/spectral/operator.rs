use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for pairwise inner products of projection basis vectors.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Relative tolerance used to accept an operator as positive semidefinite.
pub const PSD_REL_TOL: f64 = 1e-10;

/// A finite self-adjoint operator stored as a dense symmetric matrix.
///
/// Entries are symmetrized on construction, so `a[(i, j)] == a[(j, i)]`
/// holds bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricOperator {
    matrix: DMatrix<f64>,
}

impl SymmetricOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidOperator("dimension must be at least 1".into()));
        }
        let mut matrix = matrix;
        let n = matrix.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
                matrix[(i, j)] = avg;
                matrix[(j, i)] = avg;
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidOperator("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|v| v.is_finite())
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Product of two operators, re-symmetrized. Only meaningful when the
    /// factors commute (e.g. functions of the same operator).
    pub fn compose_commuting(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim())?;
        Self::new(&self.matrix * &other.matrix)
    }

    /// Spectral norm.
    pub fn op_norm(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.matrix.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                actual: other,
            });
        }
        Ok(())
    }
}

/// Orthogonal projection `P = Id - sum_v v v^T` onto the complement of a
/// family of orthonormal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    dim: usize,
    basis: Vec<DVector<f64>>,
}

impl Projection {
    pub fn new(dim: usize, basis: Vec<DVector<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProjection("dimension must be at least 1".into()));
        }
        for (i, v) in basis.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            for (j, w) in basis.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                let ip = v.dot(w);
                if (ip - target).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidProjection(format!(
                        "<b{i}, b{j}> = {ip} (expected {target})"
                    )));
                }
            }
        }
        Ok(Self { dim, basis })
    }

    /// The identity projection (empty removed family).
    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// Projection removing the listed coordinate directions.
    pub fn removing_coordinates(dim: usize, coords: &[usize]) -> Result<Self> {
        let basis = coords
            .iter()
            .map(|&c| {
                if c >= dim {
                    return Err(Error::InvalidProjection(format!("coordinate {c} >= {dim}")));
                }
                let mut v = DVector::zeros(dim);
                v[c] = 1.0;
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// rank(Id - P).
    pub fn rank_deficit(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, f: &DVector<f64>) -> DVector<f64> {
        let mut out = f.clone();
        for b in &self.basis {
            let c = b.dot(f);
            out.axpy(-c, b, 1.0);
        }
        out
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.dim, self.dim);
        for b in &self.basis {
            m -= b * b.transpose();
        }
        m
    }

    pub fn as_operator(&self) -> SymmetricOperator {
        SymmetricOperator::new(self.matrix()).expect("projection matrix is square and nonempty")
    }

    /// Operator norm of `P^2 - P`.
    pub fn idempotency_defect(&self) -> f64 {
        let p = self.matrix();
        let d = &p * &p - &p;
        SymmetricOperator::new(d).map(|o| o.op_norm()).unwrap_or(f64::INFINITY)
    }
}

/// Returns `P A P` as a symmetric operator.
pub fn apply_projection(p: &Projection, a: &SymmetricOperator) -> Result<SymmetricOperator> {
    a.check_dim(p.dim())?;
    let pm = p.matrix();
    SymmetricOperator::new(&pm * a.matrix() * &pm)
}
