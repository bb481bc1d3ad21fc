//! Localized operators around a base vertex: cutoffs, the telescoping
//! identity, top eigenvectors of `P chi A chi P`, and the gain identity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::net::{cell_indicator, NetPartition};
use crate::spectral::{eigensystem, Projection, SymmetricOperator};

/// Tolerance on `||P chi - chi P||` (max entry).
pub const COMMUTATOR_TOL: f64 = 1e-10;
/// Relative tolerance of the exact identities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for `P phi = phi`, `chi phi = phi`.
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Entrywise floor for a positivity-preserving semigroup.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Eigenvalues at or below this count as zero for [`top_eigenvector`].
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Diagonal 0/1 multiplication operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoff {
    pub mask: Vec<bool>,
}

impl Cutoff {
    pub fn full(dim: usize) -> Self {
        Self { mask: vec![true; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(v.len(), |i, _| if self.mask[i] { v[i] } else { 0.0 })
    }

    /// `(1 - chi) v`.
    pub fn apply_complement(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(v.len(), |i, _| if self.mask[i] { 0.0 } else { v[i] })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            if i == j && self.mask[i] {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !(a & b))
    }

    /// Max entry of `P chi - chi P`.
    pub fn commutator_with(&self, p: &Projection) -> f64 {
        let pm = p.matrix();
        let c = self.matrix();
        (&pm * &c - &c * &pm).amax()
    }
}

/// Indicator of the union of all cells meeting the closed hop-ball
/// `B(x, radius)`.
pub fn cutoff_indicator(partition: &NetPartition, g: &WeightedGraph, x: usize, radius: f64) -> Result<Cutoff> {
    if !(radius >= 0.0) {
        return Err(Error::InvalidParams(format!("cutoff radius {radius} < 0")));
    }
    if x >= g.n() || partition.cell_of.len() != g.n() {
        return Err(Error::InvalidParams(format!("vertex {x} outside the partition")));
    }
    let mut hit = vec![false; partition.n_cells()];
    for (v, d) in g.bfs_from(x).into_iter().enumerate() {
        if d.is_some_and(|d| d as f64 <= radius) {
            hit[partition.cell_of[v]] = true;
        }
    }
    Ok(Cutoff {
        mask: partition.cell_of.iter().map(|&k| hit[k]).collect(),
    })
}

fn delta(dim: usize, x: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[x] = 1.0;
    v
}

fn check_frame(a: &SymmetricOperator, p: &Projection, chi: &Cutoff) -> Result<()> {
    if p.dim() != a.dim() || chi.dim() != a.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            actual: if p.dim() != a.dim() { p.dim() } else { chi.dim() },
        });
    }
    let comm = chi.commutator_with(p);
    if comm > COMMUTATOR_TOL {
        return Err(Error::PreconditionFailed(format!(
            "cutoff does not commute with the projection (defect {comm:e})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TelescopingReport {
    pub lhs_norm: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Compares `(PAP)^n d_x - (P chi A chi P)^n d_x` with the telescoping sum
/// `sum_{l<n} (P chi A)^{n-l-1} P (1 - chi) (A P)^{l+1} d_x`.
pub fn telescoping_identity_check(
    a: &SymmetricOperator,
    p: &Projection,
    chi: &Cutoff,
    x: usize,
    n: usize,
) -> Result<TelescopingReport> {
    check_frame(a, p, chi)?;
    if n == 0 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    if !chi.contains(x) {
        return Err(Error::PreconditionFailed(format!("vertex {x} outside the cutoff")));
    }
    let dim = a.dim();
    let am = a.matrix();
    let pap = |v: &DVector<f64>| p.apply(&(am * p.apply(v)));
    let pcacp = |v: &DVector<f64>| p.apply(&chi.apply(&(am * chi.apply(&p.apply(v)))));
    let pca = |v: &DVector<f64>| p.apply(&chi.apply(&(am * v)));

    let dx = delta(dim, x);
    let mut full = dx.clone();
    let mut cut = dx.clone();
    for _ in 0..n {
        full = pap(&full);
        cut = pcacp(&cut);
    }
    let lhs = full - cut;

    let mut rhs = DVector::zeros(dim);
    let mut ap_power = dx;
    for l in 0..n {
        ap_power = am * p.apply(&ap_power);
        let mut term = p.apply(&chi.apply_complement(&ap_power));
        for _ in 0..(n - l - 1) {
            term = pca(&term);
        }
        rhs += term;
    }
    let lhs_norm = lhs.norm();
    let residual = (lhs - rhs).norm();
    Ok(TelescopingReport {
        lhs_norm,
        residual,
        holds: residual <= IDENTITY_TOL * (1.0 + lhs_norm),
    })
}

/// `P chi A chi P`.
pub fn localized_operator(a: &SymmetricOperator, p: &Projection, chi: &Cutoff) -> Result<SymmetricOperator> {
    check_frame(a, p, chi)?;
    let pm = p.matrix();
    let c = chi.matrix();
    SymmetricOperator::new(&pm * &c * a.matrix() * &c * &pm)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopEigen {
    pub value: f64,
    pub vector: DVector<f64>,
    /// Set when the operator vanishes; `vector` is then an arbitrary unit
    /// vector.
    pub degenerate: bool,
}

impl TopEigen {
    /// Whether `P phi = phi` and `chi phi = phi` within [`INVARIANCE_TOL`].
    pub fn is_localized(&self, p: &Projection, chi: &Cutoff) -> bool {
        (p.apply(&self.vector) - &self.vector).amax() <= INVARIANCE_TOL
            && (chi.apply(&self.vector) - &self.vector).amax() <= INVARIANCE_TOL
    }
}

/// Largest eigenvalue and a unit eigenvector of a PSD operator.
pub fn top_eigenvector(bx: &SymmetricOperator) -> Result<TopEigen> {
    let sys = eigensystem(bx, None)?;
    let value = sys.spectrum.values()[0];
    if value.abs() <= DEGENERATE_TOL {
        return Ok(TopEigen {
            value,
            vector: delta(bx.dim(), 0),
            degenerate: true,
        });
    }
    let mut vector = sys.vectors.column(0).into_owned();
    vector /= vector.norm();
    // fix the sign so the largest-magnitude entry is positive
    if vector[vector.iamax()] < 0.0 {
        vector = -vector;
    }
    Ok(TopEigen {
        value,
        vector,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GainReport {
    /// `||A|phi|||^2 - ||P chi A phi||^2`.
    pub eps: f64,
    /// `4 <A phi_+, A phi_->`.
    pub term_interaction: f64,
    /// `sum_{k in N_x} (<A phi_+, psi_k> - <A phi_-, psi_k>)^2`.
    pub term_cells: f64,
    /// `||(1 - chi) A phi||^2`.
    pub term_outside: f64,
    pub residual: f64,
    /// Net cells inside the cutoff.
    pub local_net_cells: usize,
    pub holds: bool,
}

/// Splits the defect `||A|phi|||^2 - ||P chi A phi||^2` into the
/// interaction, net-cell and outside terms and compares both sides.
pub fn gain_identity_check(
    a: &SymmetricOperator,
    p: &Projection,
    chi: &Cutoff,
    partition: &NetPartition,
    phi: &DVector<f64>,
) -> Result<GainReport> {
    check_frame(a, p, chi)?;
    if phi.len() != a.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), actual: phi.len() });
    }
    if (p.apply(phi) - phi).amax() > INVARIANCE_TOL || (chi.apply(phi) - phi).amax() > INVARIANCE_TOL {
        return Err(Error::PreconditionFailed("phi is not fixed by P and chi".into()));
    }
    if a.min_entry() < -POSITIVITY_TOL {
        return Err(Error::PreconditionFailed(format!(
            "operator has a negative entry {:e}",
            a.min_entry()
        )));
    }
    let mut local_cells = Vec::new();
    for &k in &partition.net_indices {
        let members = &partition.cell_members[k];
        let inside = members.iter().filter(|&&v| chi.contains(v)).count();
        if inside == members.len() {
            local_cells.push(k);
        } else if inside > 0 {
            return Err(Error::PreconditionFailed(format!(
                "cutoff splits net cell {k}"
            )));
        }
    }

    let am = a.matrix();
    let plus = phi.map(|v| v.max(0.0));
    let minus = phi.map(|v| (-v).max(0.0));
    let abs = phi.abs();
    let a_plus = am * &plus;
    let a_minus = am * &minus;
    let a_phi = am * phi;

    let eps = (am * &abs).norm_squared() - p.apply(&chi.apply(&a_phi)).norm_squared();
    let term_interaction = 4.0 * a_plus.dot(&a_minus);
    let term_outside = chi.apply_complement(&a_phi).norm_squared();
    let mut term_cells = 0.0;
    for &k in &local_cells {
        let psi = cell_indicator(partition, k, a.dim())?;
        let d = a_plus.dot(&psi) - a_minus.dot(&psi);
        term_cells += d * d;
    }
    let residual = (eps - (term_interaction + term_cells + term_outside)).abs();
    Ok(GainReport {
        eps,
        term_interaction,
        term_cells,
        term_outside,
        residual,
        local_net_cells: local_cells.len(),
        holds: residual <= IDENTITY_TOL * (1.0 + eps.abs()) && eps >= -IDENTITY_TOL,
    })
}

/// `|<A_t |phi_1|, |phi_2|>|` for the top eigenvectors of the localized
/// operators at two base points with disjoint cutoffs.
pub fn far_support_decay_probe(
    a: &SymmetricOperator,
    a_t: &SymmetricOperator,
    p: &Projection,
    chi1: &Cutoff,
    chi2: &Cutoff,
) -> Result<f64> {
    if !chi1.is_disjoint(chi2) {
        return Err(Error::PreconditionFailed("cutoff supports overlap".into()));
    }
    if a_t.dim() != a.dim() {
        return Err(Error::DimMismatch { expected: a.dim(), actual: a_t.dim() });
    }
    let top1 = top_eigenvector(&localized_operator(a, p, chi1)?)?;
    let top2 = top_eigenvector(&localized_operator(a, p, chi2)?)?;
    if top1.degenerate || top2.degenerate {
        return Err(Error::PreconditionFailed("localized operator vanishes".into()));
    }
    Ok((a_t.matrix() * top1.vector.abs()).dot(&top2.vector.abs()).abs())
}
