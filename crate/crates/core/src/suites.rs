//! Seeded random instances and the identity suites run over them.
//!
//! Trial `i` of a suite draws from a ChaCha8 stream keyed by `(seed, i)`,
//! so results do not depend on how trials are scheduled.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::generators::{barbell, complete, cycle, path, random_connected, random_regular};
use crate::graph::WeightedGraph;
use crate::net::{build_net, cell_projection};
use crate::pipeline::{
    cutoff_indicator, gain_identity_check, localized_operator, telescoping_identity_check,
    top_eigenvector, IDENTITY_TOL,
};
use crate::spectral::{
    heat_semigroup, interlace_check, trace_power_identity, Projection, SymmetricOperator,
    INTERLACE_TOL, TRACE_IDENTITY_TOL,
};

pub const DEFAULT_SEED: u64 = 42;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Symmetric matrix with Gaussian entries scaled by `1/sqrt(dim)`.
pub fn random_symmetric<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<SymmetricOperator> {
    let g = gaussian_matrix(dim, dim, rng) / (dim as f64).sqrt();
    SymmetricOperator::new((&g + g.transpose()) * 0.5)
}

/// `G G^T / dim` with `G` of random rank between 1 and `dim`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<SymmetricOperator> {
    let rank = rng.random_range(1..=dim);
    let g = gaussian_matrix(dim, rank, rng);
    SymmetricOperator::new(&g * g.transpose() / dim as f64)
}

/// Projection removing a random `k`-dimensional subspace.
pub fn random_projection<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<Projection> {
    if k > dim {
        return Err(Error::InvalidParams(format!("corank {k} exceeds dimension {dim}")));
    }
    if k == 0 {
        return Projection::identity(dim);
    }
    let q = gaussian_matrix(dim, k, rng).qr().q();
    let basis = (0..k).map(|j| q.column(j).into_owned()).collect();
    Projection::new(dim, basis)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    /// Largest violation or residual over all trials.
    pub worst: f64,
    pub tolerance: f64,
    pub all_passed: bool,
}

fn summarize(name: &str, seed: u64, tolerance: f64, results: &[(bool, f64)]) -> SuiteSummary {
    let passed = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    SuiteSummary {
        name: name.into(),
        seed,
        trials: results.len(),
        passed,
        worst,
        tolerance,
        all_passed: passed == results.len() && !results.is_empty(),
    }
}

fn check_trials(trials: usize, dim_max: usize, dim_min: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParams("empty suite: trials must be >= 1".into()));
    }
    if dim_max < dim_min {
        return Err(Error::InvalidParams(format!("dim_max must be >= {dim_min}, got {dim_max}")));
    }
    Ok(())
}

/// Interlacing for random PSD operators compressed by random projections.
pub fn interlace_suite(seed: u64, trials: usize, dim_max: usize) -> Result<SuiteSummary> {
    check_trials(trials, dim_max, 1)?;
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let dim = rng.random_range(1..=dim_max);
            let a = random_psd(dim, &mut rng)?;
            let k = rng.random_range(0..=dim);
            let p = random_projection(dim, k, &mut rng)?;
            let r = interlace_check(&a, &p)?;
            Ok((r.holds, r.worst_violation.max(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("interlacing", seed, INTERLACE_TOL, &results))
}

/// `Tr(Q^{2n}) = sum_x ||Q^n e_x||^2` for random symmetric `Q`, `n <= n_max`.
pub fn trace_suite(seed: u64, trials: usize, dim_max: usize, n_max: usize) -> Result<SuiteSummary> {
    check_trials(trials, dim_max, 1)?;
    if n_max == 0 {
        return Err(Error::InvalidParams("n_max must be >= 1".into()));
    }
    let results = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let dim = rng.random_range(1..=dim_max);
            let q = random_symmetric(dim, &mut rng)?;
            let n = rng.random_range(1..=n_max);
            let r = trace_power_identity(&q, n)?;
            Ok((r.holds(), r.residual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize("trace_identity", seed, TRACE_IDENTITY_TOL, &results))
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSuiteSummary {
    pub telescoping: SuiteSummary,
    pub gain: SuiteSummary,
    /// Smallest gain over all configurations.
    pub min_gain: f64,
    /// Gain checks performed (one or two per configuration).
    pub gain_checks: usize,
}

struct LocalTrial {
    tele: (bool, f64),
    gains: Vec<(bool, f64, f64)>,
}

fn local_trial(seed: u64, i: u64, dim_max: usize) -> Result<LocalTrial> {
    let mut rng = trial_rng(seed, i);
    let n = rng.random_range(4..=dim_max);
    let g = if n % 2 == 0 && rng.random_bool(0.4) {
        random_regular(n, 3, &mut rng)?
    } else {
        let p = rng.random_range(0.1..0.5);
        random_connected(n, p, &mut rng)?
    };
    let t = rng.random_range(0.3..2.0);
    let a = heat_semigroup(&g.laplacian(), t)?;
    let sep = rng.random_range(1..=2);
    let radius = rng.random_range(1..=3);
    let partition = build_net(&g, sep, radius)?;
    let p = cell_projection(&partition, n)?;
    let x = rng.random_range(0..n);
    let cut_radius = rng.random_range(0..=3) as f64;
    let chi = cutoff_indicator(&partition, &g, x, cut_radius)?;
    let steps = rng.random_range(1..=4);
    let tele = telescoping_identity_check(&a, &p, &chi, x, steps)?;

    let mut phis = Vec::new();
    let top = top_eigenvector(&localized_operator(&a, &p, &chi)?)?;
    if !top.degenerate {
        phis.push(top.vector);
    }
    let noise = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let local = p.apply(&chi.apply(&noise));
    if local.norm() > 1e-8 {
        phis.push(&local / local.norm());
    }
    let mut gains = Vec::new();
    for phi in &phis {
        let r = gain_identity_check(&a, &p, &chi, &partition, phi)?;
        gains.push((r.holds, r.residual / (1.0 + r.eps.abs()), r.eps));
    }
    Ok(LocalTrial {
        tele: (tele.holds, tele.residual / (1.0 + tele.lhs_norm)),
        gains,
    })
}

/// Telescoping and gain identities on random heat-semigroup frames with
/// `4 <= dim <= dim_max`.
pub fn local_identity_suite(seed: u64, trials: usize, dim_max: usize) -> Result<LocalSuiteSummary> {
    check_trials(trials, dim_max, 4)?;
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|i| local_trial(seed, i, dim_max))
        .collect::<Result<Vec<_>>>()?;
    let tele: Vec<(bool, f64)> = runs.iter().map(|r| r.tele).collect();
    let gains: Vec<(bool, f64)> = runs
        .iter()
        .flat_map(|r| r.gains.iter().map(|g| (g.0, g.1)))
        .collect();
    let min_gain = runs
        .iter()
        .flat_map(|r| r.gains.iter().map(|g| g.2))
        .fold(f64::INFINITY, f64::min);
    Ok(LocalSuiteSummary {
        telescoping: summarize("telescoping", seed, IDENTITY_TOL, &tele),
        gain: summarize("gain", seed, IDENTITY_TOL, &gains),
        min_gain,
        gain_checks: gains.len(),
    })
}

/// Fixed graphs for the multiplicity pipeline: paths, cycles, complete
/// graphs, barbells, random regular and random weighted graphs.
pub fn pipeline_corpus() -> Result<Vec<(String, WeightedGraph)>> {
    let mut out = Vec::new();
    for n in [5, 8, 12] {
        out.push((format!("path{n}"), path(n)?));
    }
    for n in [5, 6, 8, 12, 16] {
        out.push((format!("cycle{n}"), cycle(n)?));
    }
    for n in [4, 5, 7] {
        out.push((format!("complete{n}"), complete(n)?));
    }
    for (k, bridge) in [(3, 0), (4, 1), (5, 2)] {
        out.push((format!("barbell{k}_{bridge}"), barbell(k, bridge)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    for (n, d) in [(8, 3), (12, 3), (16, 3), (10, 4), (14, 4)] {
        out.push((format!("regular{n}_{d}"), random_regular(n, d, &mut rng)?));
    }
    for n in [9, 15] {
        out.push((format!("random{n}"), random_connected(n, 0.25, &mut rng)?));
    }
    Ok(out)
}
