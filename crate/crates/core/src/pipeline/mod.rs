//! End-to-end multiplicity bound on a finite graph.
//!
//! The Laplace operator is replaced by the graph Laplacian `L = D - W` and
//! the heat semigroup by `A = exp(-r1 L)`. The pipeline counts the
//! multiplicity `m` of a target eigenvalue of `A`, compresses `A` by the
//! projection `P` off the net cell indicators, counts the multiplicity
//! `m'` in `PAP`, and checks the trace bound, interlacing, and
//! `m <= m' + rank(Id - P)`.

mod constants;
mod local;

pub use constants::{assemble_constants, ConstantChoice, ConstantVerdicts, CONSTANT_GRID_STEP};
pub use local::{
    cutoff_indicator, far_support_decay_probe, gain_identity_check, localized_operator,
    telescoping_identity_check, top_eigenvector, Cutoff, GainReport, TelescopingReport, TopEigen,
    COMMUTATOR_TOL, DEGENERATE_TOL, IDENTITY_TOL, INVARIANCE_TOL, POSITIVITY_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::net::{build_net, cell_projection, NetPartition};
use crate::spectral::{
    apply_projection, eigendecompose_default, heat_semigroup, interlace_check,
    trace_power_identity, Projection, SymmetricOperator,
};

/// Slack allowed in `m' mu^{2n} <= Tr((PAP)^{2n})`.
pub const TRACE_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    /// Net-scale constant.
    pub c: f64,
    /// Cutoff-radius constant: cutoffs use radius `chi_cut * r2`.
    pub chi_cut: f64,
    /// Heat-kernel truncation constant (recorded, not used on graphs).
    pub heat_cut: f64,
    pub r1: f64,
    pub r2: f64,
    /// Semigroup time unit: `A = exp(-r1 * t_unit * L)`.
    pub t_unit: f64,
    /// Separation of the Voronoi centers (1 gives singleton cells).
    pub cell_separation: usize,
    /// Net radius; defaults to `ceil(r1)`.
    pub net_radius: Option<usize>,
    /// Curvature lower bound used only to annotate the continuum hypotheses.
    pub curvature_floor: f64,
    /// Compute per-vertex localized diagnostics.
    pub vertex_diagnostics: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            chi_cut: 1.0,
            heat_cut: 16.0,
            r1: 1.0,
            r2: 1.0,
            t_unit: 1.0,
            cell_separation: 1,
            net_radius: None,
            curvature_floor: -1.0,
            vertex_diagnostics: false,
        }
    }
}

impl PipelineParams {
    /// Radii `r1 = c log log n`, `r2 = c log n`, each clamped below at 1 and
    /// with `r2 >= r1`. Needs `n >= 3`.
    pub fn for_model_size(n: usize, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParams(format!(
                "model size {n} < 3: set r1 and r2 explicitly"
            )));
        }
        if !(c > 0.0) {
            return Err(Error::InvalidParams(format!("c must be positive, got {c}")));
        }
        let size = n as f64;
        let r1 = (c * size.ln().ln()).max(1.0);
        let r2 = (c * size.ln()).max(1.0).max(r1);
        Ok(Self {
            c,
            r1,
            r2,
            ..Self::default()
        })
    }

    /// Radii for the given graph: model-size defaults when `n >= 3`,
    /// otherwise `r1 = r2 = 1`.
    pub fn for_graph(g: &WeightedGraph, c: f64) -> Result<Self> {
        if g.n() >= 3 {
            Self::for_model_size(g.n(), c)
        } else {
            Ok(Self { c, ..Self::default() })
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("chi_cut", self.chi_cut),
            ("heat_cut", self.heat_cut),
            ("t_unit", self.t_unit),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r1 >= 1.0) || !(self.r2 >= self.r1) || !self.r2.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need 1 <= r1 <= r2, got r1 = {}, r2 = {}",
                self.r1, self.r2
            )));
        }
        if self.cell_separation == 0 || self.net_radius == Some(0) {
            return Err(Error::InvalidParams("separations must be >= 1".into()));
        }
        if !(self.curvature_floor < 0.0) {
            return Err(Error::InvalidParams("curvature floor must be negative".into()));
        }
        Ok(())
    }

    pub fn effective_net_radius(&self) -> usize {
        self.net_radius.unwrap_or_else(|| self.r1.ceil() as usize)
    }

    /// `floor(r2 / r1) + 1`.
    pub fn n_steps(&self) -> usize {
        (self.r2 / self.r1).floor() as usize + 1
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.chi_cut * self.r2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub trace_bound_ok: bool,
    pub interlace_ok: bool,
    /// `m <= m' + rank(Id - P)`.
    pub final_inequality_ok: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.trace_bound_ok && self.interlace_ok && self.final_inequality_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDiagnostic {
    pub x: usize,
    /// Top eigenvalue of `P chi_x A chi_x P`.
    pub top_value: f64,
    pub degenerate: bool,
    /// `||A |phi_x|||^2`.
    pub abs_energy: f64,
    /// `abs_energy > mu^2` with `mu` the target eigenvalue of `A`.
    pub exceeds_threshold: bool,
    pub gain_eps: Option<f64>,
    pub gain_residual: Option<f64>,
    pub telescoping_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub target_index: usize,
    /// `j`-th smallest Laplacian eigenvalue.
    pub lambda_j: f64,
    /// `exp(-r1 t_unit lambda_j)`.
    pub target_eigenvalue: f64,
    pub m: usize,
    pub m_prime: usize,
    pub rank_deficit: usize,
    pub trace_value: f64,
    pub trace_identity_residual: f64,
    pub n_steps: usize,
    pub r1: f64,
    pub r2: f64,
    pub net_radius: usize,
    pub cell_count: usize,
    pub cutoff_radius: f64,
    pub interlace_worst_violation: f64,
    /// Whether the net radius satisfies `r <= log(|b| n / 8 pi) / sqrt|b|`,
    /// the range where the continuum net-size bound applies.
    pub net_radius_in_continuum_range: bool,
    pub verdicts: Verdicts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Vec<VertexDiagnostic>>,
}

/// Operators shared by every step of one pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineFrame {
    pub semigroup: SymmetricOperator,
    pub partition: NetPartition,
    pub projection: Projection,
}

impl PipelineFrame {
    pub fn build(g: &WeightedGraph, params: &PipelineParams) -> Result<Self> {
        params.validate()?;
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        let semigroup = heat_semigroup(&g.laplacian(), params.r1 * params.t_unit)?;
        let partition = build_net(g, params.cell_separation, params.effective_net_radius())?;
        let projection = cell_projection(&partition, g.n())?;
        Ok(Self {
            semigroup,
            partition,
            projection,
        })
    }
}

pub fn run_pipeline(g: &WeightedGraph, params: &PipelineParams, target_index: usize) -> Result<BoundReport> {
    params.validate()?;
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    if target_index < 2 || target_index > g.n() {
        return Err(Error::InvalidIndex {
            index: target_index,
            len: g.n(),
        });
    }
    let frame = PipelineFrame::build(g, params)?;
    let a = &frame.semigroup;
    let lambda = eigendecompose_default(&g.laplacian())?;
    let lambda_j = lambda.jth_smallest(target_index)?.max(0.0);

    // exp is decreasing, so the j-th smallest Laplacian eigenvalue sits at
    // descending index j-1 of A.
    let alpha = eigendecompose_default(a)?;
    let idx = target_index - 1;
    let group = alpha
        .groups()
        .into_iter()
        .find(|r| r.contains(&idx))
        .expect("groups cover every index");
    let mu = alpha.values()[idx];
    let m = group.len();
    let tol = alpha.group_tol();
    let (hi, lo) = (alpha.values()[group.start] + tol, alpha.values()[group.end - 1] - tol);

    let compressed = apply_projection(&frame.projection, a)?;
    let beta = eigendecompose_default(&compressed)?;
    let m_prime = beta.count_in_window(lo, hi)?;
    let rank_deficit = frame.projection.rank_deficit();

    let n_steps = params.n_steps();
    let trace = trace_power_identity(&compressed, n_steps)?;
    let trace_bound_ok =
        m_prime as f64 * mu.powi(2 * n_steps as i32) <= trace.lhs + TRACE_BOUND_SLACK;

    let interlace = interlace_check(a, &frame.projection)?;

    let b = params.curvature_floor.abs();
    let continuum_limit = (b * g.n() as f64 / (8.0 * std::f64::consts::PI)).ln() / b.sqrt();
    let net_radius = params.effective_net_radius();

    let diagnostics = if params.vertex_diagnostics {
        Some(vertex_diagnostics(g, params, &frame, mu)?)
    } else {
        None
    };

    Ok(BoundReport {
        target_index,
        lambda_j,
        target_eigenvalue: mu,
        m,
        m_prime,
        rank_deficit,
        trace_value: trace.lhs,
        trace_identity_residual: trace.residual,
        n_steps,
        r1: params.r1,
        r2: params.r2,
        net_radius,
        cell_count: frame.partition.n_cells(),
        cutoff_radius: params.cutoff_radius(),
        interlace_worst_violation: interlace.worst_violation,
        net_radius_in_continuum_range: (net_radius as f64) <= continuum_limit,
        verdicts: Verdicts {
            trace_bound_ok,
            interlace_ok: interlace.holds,
            final_inequality_ok: m <= m_prime + rank_deficit,
        },
        diagnostics,
    })
}

/// Per-vertex localized quantities: top eigenpair of `P chi_x A chi_x P`,
/// the gain identity at that eigenvector, and the telescoping residual.
pub fn vertex_diagnostics(
    g: &WeightedGraph,
    params: &PipelineParams,
    frame: &PipelineFrame,
    mu: f64,
) -> Result<Vec<VertexDiagnostic>> {
    let a = &frame.semigroup;
    let p = &frame.projection;
    let n_steps = params.n_steps();
    (0..g.n())
        .map(|x| {
            let chi = cutoff_indicator(&frame.partition, g, x, params.cutoff_radius())?;
            let tele = telescoping_identity_check(a, p, &chi, x, n_steps)?;
            let top = top_eigenvector(&localized_operator(a, p, &chi)?)?;
            let abs_energy = (a.matrix() * top.vector.abs()).norm_squared();
            let gain = if top.degenerate {
                None
            } else {
                Some(gain_identity_check(a, p, &chi, &frame.partition, &top.vector)?)
            };
            Ok(VertexDiagnostic {
                x,
                top_value: top.value,
                degenerate: top.degenerate,
                abs_energy,
                exceeds_threshold: !top.degenerate && abs_energy > mu * mu,
                gain_eps: gain.map(|r| r.eps),
                gain_residual: gain.map(|r| r.residual),
                telescoping_residual: tele.residual,
            })
        })
        .collect()
}
