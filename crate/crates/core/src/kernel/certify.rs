use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    davies_lower_scaled_log, gaussian_upper_log, ln_circumference, model_log_kernel,
    radial_log_integral, ModelPlaneParams,
};
use crate::error::{Error, Result};

/// Time range on which kernel evaluations are certified.
pub const KERNEL_T_RANGE: (f64, f64) = (0.5, 20.0);
/// Largest certified distance.
pub const KERNEL_ETA_MAX: f64 = 60.0;

// Relative slack when re-checking fitted inequalities.
const FIT_LOG_SLACK: f64 = 1e-12;

/// Result of fitting a bound shape to exact kernel data on a grid.
///
/// Rows follow `t_grid`, columns follow `eta_grid` (a single column for
/// the tail check). `None` marks grid points outside the sampled region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckReport {
    pub kind: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub heat_cut: Option<f64>,
    pub t_grid: Vec<f64>,
    pub eta_grid: Vec<f64>,
    pub lhs: Vec<Vec<Option<f64>>>,
    pub mid: Option<Vec<Vec<Option<f64>>>>,
    pub rhs: Vec<Vec<Option<f64>>>,
    pub fitted_constant: f64,
    pub fitted_log_constant: f64,
    /// Upper constant of the sandwich fit.
    pub second_constant: Option<f64>,
    pub holds: bool,
}

impl KernelCheckReport {
    /// Long-format dump with header `t,eta,lhs,rhs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,eta,lhs,rhs\n");
        for (i, &t) in self.t_grid.iter().enumerate() {
            for (j, (l, r)) in self.lhs[i].iter().zip(&self.rhs[i]).enumerate() {
                let (Some(l), Some(r)) = (l, r) else { continue };
                let eta = match self.heat_cut {
                    Some(c) if self.eta_grid.is_empty() => c * t,
                    _ => self.eta_grid[j],
                };
                out.push_str(&format!("{t},{eta},{l:e},{r:e}\n"));
            }
        }
        out
    }
}

fn check_grid(t_grid: &[f64], eta_grid: &[f64], t_min: f64) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("empty t grid".into()));
    }
    for &t in t_grid {
        if !(t >= t_min && t <= KERNEL_T_RANGE.1) {
            return Err(Error::InvalidParams(format!(
                "t = {t} outside [{t_min}, {}]",
                KERNEL_T_RANGE.1
            )));
        }
    }
    for &e in eta_grid {
        if !(0.0..=KERNEL_ETA_MAX).contains(&e) {
            return Err(Error::InvalidParams(format!("eta = {e} outside [0, {KERNEL_ETA_MAX}]")));
        }
    }
    Ok(())
}

fn grid_points(t_grid: &[f64], eta_grid: &[f64]) -> Vec<(usize, usize)> {
    (0..t_grid.len())
        .flat_map(|i| (0..eta_grid.len()).map(move |j| (i, j)))
        .collect()
}

fn reshape(values: &[f64], rows: usize, cols: usize) -> Vec<Vec<Option<f64>>> {
    (0..rows)
        .map(|i| (0..cols).map(|j| Some(values[i * cols + j])).collect())
        .collect()
}

/// Fits the largest `c1` and smallest `C0` with
/// `c1 g_|K|(t, eta) <= k_t(eta) <= C0 (1/t)(1+eta^2/t) e^{-eta^2/4t}` on the grid.
pub fn sandwich_fit(
    params: &ModelPlaneParams,
    t_grid: &[f64],
    eta_grid: &[f64],
) -> Result<KernelCheckReport> {
    params.validate()?;
    check_grid(t_grid, eta_grid, KERNEL_T_RANGE.0)?;
    if eta_grid.is_empty() {
        return Err(Error::InvalidParams("empty eta grid".into()));
    }
    let points = grid_points(t_grid, eta_grid);
    let log_k = points
        .par_iter()
        .map(|&(i, j)| model_log_kernel(t_grid[i], eta_grid[j], params))
        .collect::<Result<Vec<f64>>>()?;
    let log_g: Vec<f64> = points
        .iter()
        .map(|&(i, j)| davies_lower_scaled_log(params.k, t_grid[i], eta_grid[j]))
        .collect();
    let log_u: Vec<f64> = points
        .iter()
        .map(|&(i, j)| gaussian_upper_log(t_grid[i], eta_grid[j]))
        .collect();
    let log_c1 = log_k
        .iter()
        .zip(&log_g)
        .map(|(k, g)| k - g)
        .fold(f64::INFINITY, f64::min);
    let log_c0 = log_k
        .iter()
        .zip(&log_u)
        .map(|(k, u)| k - u)
        .fold(f64::NEG_INFINITY, f64::max);
    let valid = (0..points.len()).all(|p| {
        log_c1 + log_g[p] <= log_k[p] + FIT_LOG_SLACK * log_k[p].abs().max(1.0)
            && log_k[p] <= log_c0 + log_u[p] + FIT_LOG_SLACK * log_k[p].abs().max(1.0)
    });
    let c1 = log_c1.exp();
    let c0 = log_c0.exp();
    let (rows, cols) = (t_grid.len(), eta_grid.len());
    let lhs: Vec<f64> = log_g.iter().map(|g| (log_c1 + g).exp()).collect();
    let mid: Vec<f64> = log_k.iter().map(|k| k.exp()).collect();
    let rhs: Vec<f64> = log_u.iter().map(|u| (log_c0 + u).exp()).collect();
    Ok(KernelCheckReport {
        kind: "sandwich".into(),
        k: params.k,
        heat_cut: None,
        t_grid: t_grid.to_vec(),
        eta_grid: eta_grid.to_vec(),
        lhs: reshape(&lhs, rows, cols),
        mid: Some(reshape(&mid, rows, cols)),
        rhs: reshape(&rhs, rows, cols),
        fitted_constant: c1,
        fitted_log_constant: log_c1,
        second_constant: Some(c0),
        holds: c1 > 0.0 && c0.is_finite() && valid,
    })
}

fn check_heat_cut(k: f64, heat_cut: f64) -> Result<()> {
    let floor = 8.0 * k.abs().sqrt() + 4.0;
    if !(heat_cut >= floor) {
        return Err(Error::PreconditionFailed(format!(
            "heat_cut = {heat_cut} is below 8 sqrt|K| + 4 = {floor}"
        )));
    }
    Ok(())
}

/// Logarithm of the heat mass outside the ball of radius `heat_cut * t`.
pub fn l1_tail_log_mass(params: &ModelPlaneParams, heat_cut: f64, t: f64) -> Result<f64> {
    params.validate()?;
    if !(heat_cut > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need heat_cut > 0 and t > 0, got {heat_cut}, {t}"
        )));
    }
    let lo = heat_cut * t;
    if lo >= params.quad_cutoff {
        return Err(Error::InvalidParams(format!(
            "tail radius {lo} exceeds quad_cutoff {}",
            params.quad_cutoff
        )));
    }
    let density = |s: f64| -> Result<f64> {
        Ok(model_log_kernel(t, s, params)? + ln_circumference(params.k, s))
    };
    let f0 = density(lo)?;
    let mut width = 1.0;
    while density(lo + width)? - f0 > -40.0 {
        width *= 2.0;
        if lo + width >= params.quad_cutoff {
            width = params.quad_cutoff - lo;
            break;
        }
    }
    radial_log_integral(params, lo, lo + width, lo, f0, |s| model_log_kernel(t, s, params))
}

/// Fits the smallest `C0` with `tail(t) <= C0 exp(|K| t - heat_cut^2 t / 16)`.
pub fn l1_tail_check(
    params: &ModelPlaneParams,
    heat_cut: f64,
    t_grid: &[f64],
) -> Result<KernelCheckReport> {
    params.validate()?;
    check_heat_cut(params.k, heat_cut)?;
    check_grid(t_grid, &[], 1.0)?;
    let log_tail = t_grid
        .par_iter()
        .map(|&t| l1_tail_log_mass(params, heat_cut, t))
        .collect::<Result<Vec<f64>>>()?;
    let log_bound: Vec<f64> = t_grid
        .iter()
        .map(|&t| params.k.abs() * t - heat_cut * heat_cut * t / 16.0)
        .collect();
    let log_c0 = log_tail
        .iter()
        .zip(&log_bound)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let lhs = log_tail.iter().map(|v| vec![Some(v.exp())]).collect();
    let rhs = log_bound.iter().map(|b| vec![Some((log_c0 + b).exp())]).collect();
    Ok(KernelCheckReport {
        kind: "l1_tail".into(),
        k: params.k,
        heat_cut: Some(heat_cut),
        t_grid: t_grid.to_vec(),
        eta_grid: Vec::new(),
        lhs,
        mid: None,
        rhs,
        fitted_constant: log_c0.exp(),
        fitted_log_constant: log_c0,
        second_constant: None,
        holds: log_c0.is_finite(),
    })
}

/// Fits the largest `C0` with
/// `k_t(eta + alpha) / k_t(eta) >= C0 exp(-5 (1+|K|)(1+heat_cut) t)` over
/// `eta <= heat_cut * t` and `alpha` in `{0, +-(2t+2), +-(4t+4)}`.
///
/// `lhs` holds the fitted floor, `rhs` the smallest observed ratio per
/// `(t, eta)`. The constant can exceed the double range, so
/// `fitted_log_constant` is the primary output.
pub fn variation_ratio_check(
    params: &ModelPlaneParams,
    heat_cut: f64,
    t_grid: &[f64],
    eta_grid: &[f64],
) -> Result<KernelCheckReport> {
    params.validate()?;
    if !(heat_cut > 0.0) {
        return Err(Error::InvalidParams(format!("heat_cut must be positive, got {heat_cut}")));
    }
    check_grid(t_grid, eta_grid, 1.0)?;
    let points = grid_points(t_grid, eta_grid);
    let min_log_ratio = points
        .par_iter()
        .map(|&(i, j)| -> Result<Option<f64>> {
            let (t, eta) = (t_grid[i], eta_grid[j]);
            if eta > heat_cut * t {
                return Ok(None);
            }
            let base = model_log_kernel(t, eta, params)?;
            let mut worst = f64::INFINITY;
            for alpha in [-(4.0 * t + 4.0), -(2.0 * t + 2.0), 0.0, 2.0 * t + 2.0, 4.0 * t + 4.0] {
                let shifted = eta + alpha;
                if shifted < 0.0 {
                    continue;
                }
                worst = worst.min(model_log_kernel(t, shifted, params)? - base);
            }
            Ok(Some(worst))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let log_floor =
        |t: f64| -5.0 * (1.0 + params.k.abs()) * (1.0 + heat_cut) * t;
    let log_c0 = points
        .iter()
        .zip(&min_log_ratio)
        .filter_map(|(&(i, _), r)| r.map(|r| r - log_floor(t_grid[i])))
        .fold(f64::INFINITY, f64::min);
    let cols = eta_grid.len();
    let mut lhs = vec![vec![None; cols]; t_grid.len()];
    let mut rhs = vec![vec![None; cols]; t_grid.len()];
    for (&(i, j), r) in points.iter().zip(&min_log_ratio) {
        if let Some(r) = r {
            lhs[i][j] = Some((log_c0 + log_floor(t_grid[i])).exp());
            rhs[i][j] = Some(r.exp());
        }
    }
    Ok(KernelCheckReport {
        kind: "variation_ratio".into(),
        k: params.k,
        heat_cut: Some(heat_cut),
        t_grid: t_grid.to_vec(),
        eta_grid: eta_grid.to_vec(),
        lhs,
        mid: None,
        rhs,
        fitted_constant: log_c0.exp(),
        fitted_log_constant: log_c0,
        second_constant: None,
        holds: log_c0.is_finite(),
    })
}
