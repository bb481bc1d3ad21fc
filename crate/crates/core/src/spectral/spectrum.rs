use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operator::SymmetricOperator;
use crate::error::{Error, Result};

/// Relative factor of the default multiplicity grouping tolerance.
pub const DEFAULT_GROUP_REL_TOL: f64 = 1e-8;

/// Eigenvalues sorted in descending order, with a grouping tolerance used
/// to read off multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    group_tol: f64,
}

/// Default grouping tolerance `1e-8 * (1 + max |lambda|)`.
pub fn default_group_tol(values: &[f64]) -> f64 {
    let max_abs = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    DEFAULT_GROUP_REL_TOL * (1.0 + max_abs)
}

impl Spectrum {
    /// Builds a spectrum from arbitrary-order values.
    pub fn new(mut values: Vec<f64>, group_tol: f64) -> Result<Self> {
        if !(group_tol >= 0.0) {
            return Err(Error::InvalidParams(format!("group_tol {group_tol} < 0")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values, group_tol })
    }

    pub fn with_default_tol(values: Vec<f64>) -> Result<Self> {
        let tol = default_group_tol(&values);
        Self::new(values, tol)
    }

    /// Descending values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ascending(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }

    pub fn group_tol(&self) -> f64 {
        self.group_tol
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplicity groups as index ranges into [`Self::values`]; adjacent
    /// values differing by at most `group_tol` share a group.
    pub fn groups(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.values.len() {
            if i == self.values.len() || self.values[i - 1] - self.values[i] > self.group_tol {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Size of the group containing descending index `idx`.
    pub fn group_size_at(&self, idx: usize) -> usize {
        self.groups()
            .into_iter()
            .find(|g| g.contains(&idx))
            .map_or(0, |g| g.len())
    }

    /// Number of eigenvalues in `[target - tol, target + tol]`.
    pub fn multiplicity(&self, target: f64, tol: f64) -> usize {
        self.values
            .iter()
            .filter(|&&v| v >= target - tol && v <= target + tol)
            .count()
    }

    /// Number of eigenvalues in the closed window `[lo, hi]`.
    pub fn count_in_window(&self, lo: f64, hi: f64) -> Result<usize> {
        if !(lo <= hi) {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(self.values.iter().filter(|&&v| v >= lo && v <= hi).count())
    }

    /// The `j`-th smallest eigenvalue (1-based).
    pub fn jth_smallest(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.values.len() {
            return Err(Error::InvalidIndex {
                index: j,
                len: self.values.len(),
            });
        }
        Ok(self.values[self.values.len() - j])
    }

    /// `true` iff the `j`-th smallest eigenvalue is at most `cap`.
    pub fn eigenvalue_upper_bound_check(&self, j: usize, cap: f64) -> Result<bool> {
        Ok(self.jth_smallest(j)? <= cap)
    }
}

/// Eigenvalues with matching orthonormal eigenvectors (columns), sorted
/// descending.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub spectrum: Spectrum,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    /// Operator norm of `A - V diag(values) V^T`.
    pub fn reconstruction_residual(&self, a: &SymmetricOperator) -> f64 {
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            self.spectrum.values(),
        ));
        let rebuilt = &self.vectors * lambda * self.vectors.transpose();
        let diff = a.matrix() - rebuilt;
        diff.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

/// Full symmetric eigendecomposition, eigenpairs sorted descending.
pub fn eigensystem(a: &SymmetricOperator, group_tol: Option<f64>) -> Result<Eigensystem> {
    if !a.is_finite() {
        return Err(Error::InvalidOperator("non-finite entries".into()));
    }
    let eig = a.matrix().clone().symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let tol = group_tol.unwrap_or_else(|| default_group_tol(&values));
    Ok(Eigensystem {
        spectrum: Spectrum::new(values, tol)?,
        vectors,
    })
}

/// All eigenvalues of `a`, sorted descending.
pub fn eigendecompose(a: &SymmetricOperator, group_tol: f64) -> Result<Spectrum> {
    if !(group_tol >= 0.0) {
        return Err(Error::InvalidParams(format!("group_tol {group_tol} < 0")));
    }
    Ok(eigensystem(a, Some(group_tol))?.spectrum)
}

/// [`eigendecompose`] with the default grouping tolerance.
pub fn eigendecompose_default(a: &SymmetricOperator) -> Result<Spectrum> {
    Ok(eigensystem(a, None)?.spectrum)
}
