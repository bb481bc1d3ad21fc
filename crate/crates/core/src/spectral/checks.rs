//! Finite-dimensional checks of the interlacing theorem and the trace
//! formula for powers of a compressed operator.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::operator::{apply_projection, Projection, SymmetricOperator};
use super::semigroup::require_psd;
use super::spectrum::{eigendecompose_default, Spectrum};
use crate::error::{Error, Result};

/// Violation threshold above which interlacing is reported as failing.
pub const INTERLACE_TOL: f64 = 1e-9;

/// Threshold on the relative residual of the trace identity.
pub const TRACE_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterlaceReport {
    pub alpha: Spectrum,
    pub beta: Spectrum,
    /// Codimension of the range of `P`.
    pub k: usize,
    pub holds: bool,
    pub worst_violation: f64,
}

/// Checks `alpha_j >= beta_j >= alpha_{j+k}` where `alpha` is the spectrum
/// of `a`, `beta` that of `P a P` and `k = rank(Id - P)`. Indices past the
/// dimension read as zero.
pub fn interlace_check(a: &SymmetricOperator, p: &Projection) -> Result<InterlaceReport> {
    require_psd(a)?;
    let compressed = apply_projection(p, a)?;
    let alpha = eigendecompose_default(a)?;
    let beta = eigendecompose_default(&compressed)?;
    let k = p.rank_deficit();
    let at = |s: &Spectrum, j: usize| s.values().get(j).copied().unwrap_or(0.0);

    let mut worst = 0.0_f64;
    for j in 0..a.dim() {
        let (aj, bj, ajk) = (at(&alpha, j), at(&beta, j), at(&alpha, j + k));
        worst = worst.max(bj - aj).max(ajk - bj);
    }
    Ok(InterlaceReport {
        alpha,
        beta,
        k,
        holds: worst <= INTERLACE_TOL,
        worst_violation: worst,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceIdentityReport {
    /// `Tr(Q^{2n})` by repeated matrix products.
    pub lhs: f64,
    /// `sum_x ||Q^n e_x||^2` by applying `Q` to each coordinate vector.
    pub rhs: f64,
    /// `|lhs - rhs| / (1 + |lhs|)`.
    pub residual: f64,
}

impl TraceIdentityReport {
    pub fn holds(&self) -> bool {
        self.residual <= TRACE_IDENTITY_TOL
    }
}

pub fn trace_power_identity(q: &SymmetricOperator, n: usize) -> Result<TraceIdentityReport> {
    if n == 0 {
        return Err(Error::InvalidParams("power n must be >= 1".into()));
    }
    let dim = q.dim();
    let m = q.matrix();
    let mut power = m.clone();
    for _ in 1..(2 * n) {
        power = &power * m;
    }
    let lhs = power.trace();

    let mut rhs = 0.0;
    for x in 0..dim {
        let mut v = DVector::zeros(dim);
        v[x] = 1.0;
        for _ in 0..n {
            v = m * v;
        }
        rhs += v.norm_squared();
    }
    Ok(TraceIdentityReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / (1.0 + lhs.abs()),
    })
}
