//! Heat kernel of the constant-curvature model plane, its Davies-type
//! bounds, and numerical certification of tail and variation estimates.

mod certify;
pub mod quadrature;

pub use certify::{
    l1_tail_check, l1_tail_log_mass, sandwich_fit, variation_ratio_check, KernelCheckReport,
    KERNEL_T_RANGE, KERNEL_ETA_MAX,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quadrature::{integrate, integrate_with_breaks, QuadConfig};

// e-folds below the integrand peak at which integrals are truncated; e^-40 < 1e-17.
const TRUNCATION_EFOLDS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPlaneParams {
    /// Constant curvature, negative.
    #[serde(rename = "K")]
    pub k: f64,
    /// Maximum number of adaptive subintervals per integral.
    pub quad_points: usize,
    /// Upper limit for radial integrals (mass, tails, convolutions).
    pub quad_cutoff: f64,
    /// Relative error target for every kernel evaluation.
    pub rel_tol: f64,
}

impl Default for ModelPlaneParams {
    fn default() -> Self {
        Self {
            k: -1.0,
            quad_points: 512,
            quad_cutoff: 400.0,
            rel_tol: 1e-10,
        }
    }
}

impl ModelPlaneParams {
    pub fn with_curvature(k: f64) -> Result<Self> {
        let p = Self { k, ..Self::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k < 0.0) || !self.k.is_finite() {
            return Err(Error::InvalidParams(format!("curvature must be negative, got {}", self.k)));
        }
        if self.quad_points < 64 {
            return Err(Error::InvalidParams(format!(
                "quad_points must be >= 64, got {}",
                self.quad_points
            )));
        }
        if !(self.quad_cutoff > 0.0) {
            return Err(Error::InvalidParams("quad_cutoff must be positive".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParams("rel_tol must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn quad(&self) -> QuadConfig {
        QuadConfig {
            rel_tol: self.rel_tol,
            abs_tol: 0.0,
            max_intervals: self.quad_points,
        }
    }
}

fn check_t_eta(t: f64, eta: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParams(format!("distance must be >= 0, got {eta}")));
    }
    Ok(())
}

/// `ln sinh(x)` for `x > 0`, stable for large arguments.
pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// Logarithm of the heat kernel of the curvature -1 plane at time `t` and
/// distance `rho`.
///
/// Uses `k_t(rho) = sqrt2 e^{-t/4} (4 pi t)^{-3/2} int_rho^inf s e^{-s^2/4t} (cosh s - cosh rho)^{-1/2} ds`
/// with `s = rho + w^2`; the factor `exp(-rho^2/4t - rho/2)` is pulled out
/// so the remaining integral is of order one for every `rho`.
pub fn h2_log_kernel(t: f64, rho: f64, params: &ModelPlaneParams) -> Result<f64> {
    check_t_eta(t, rho)?;
    params.validate()?;
    // cosh s - cosh rho = e^{rho + delta/2} (1 - e^{-2 rho - delta}) sinh(delta/2)
    let integrand = |w: f64| -> f64 {
        let delta = w * w;
        let expo = -(2.0 * rho * delta + delta * delta) / (4.0 * t) - delta / 4.0;
        let one_minus = -(-2.0 * rho - delta).exp_m1();
        // sinh(delta/2) / w^2, finite as w -> 0
        let sinh_over = if delta < 1e-8 {
            0.5 + delta * delta / 48.0
        } else {
            (0.5 * delta).sinh() / delta
        };
        // one_minus / w^2 when rho = 0 tends to 1; keep the product well scaled
        let denom = if rho == 0.0 {
            let om = if delta < 1e-8 { 1.0 - 0.5 * delta } else { one_minus / delta };
            w * w * (om * sinh_over).sqrt()
        } else {
            w * (one_minus * sinh_over).sqrt()
        };
        2.0 * w * (rho + delta) * expo.exp() / denom
    };
    // exponent reaches -TRUNCATION_EFOLDS at delta^2 + (2 rho + t) delta = 4 t E
    let lin = 2.0 * rho + t;
    let delta_max = 0.5 * (-lin + (lin * lin + 16.0 * t * TRUNCATION_EFOLDS).sqrt());
    let w_max = delta_max.sqrt();
    let scale = (4.0 * t / lin).sqrt().min(w_max);
    let mut breaks = vec![0.0];
    let mut x = scale / 8.0;
    while x < w_max {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(w_max);
    let i = integrate_with_breaks(integrand, &breaks, &params.quad())?.value;
    if !(i > 0.0) {
        return Err(Error::QuadratureError { achieved: f64::INFINITY });
    }
    Ok(0.5 * 2f64.ln() - t / 4.0 - 1.5 * (4.0 * PI * t).ln() - rho * rho / (4.0 * t) - rho / 2.0
        + i.ln())
}

pub fn h2_kernel(t: f64, rho: f64, params: &ModelPlaneParams) -> Result<f64> {
    Ok(h2_log_kernel(t, rho, params)?.exp())
}

/// Logarithm of the heat kernel on the plane of curvature `params.k`,
/// `|K| k^{H2}(|K| t, sqrt|K| eta)`.
pub fn model_log_kernel(t: f64, eta: f64, params: &ModelPlaneParams) -> Result<f64> {
    check_t_eta(t, eta)?;
    params.validate()?;
    let kk = params.k.abs();
    Ok(kk.ln() + h2_log_kernel(kk * t, kk.sqrt() * eta, params)?)
}

pub fn model_kernel(t: f64, eta: f64, params: &ModelPlaneParams) -> Result<f64> {
    Ok(model_log_kernel(t, eta, params)?.exp())
}

/// Log of the circumference `2 pi sinh(sqrt|K| s) / sqrt|K|` of the radius-`s` circle.
pub(crate) fn ln_circumference(k: f64, s: f64) -> f64 {
    let sk = k.abs().sqrt();
    (2.0 * PI).ln() + ln_sinh(sk * s) - sk.ln()
}

/// Radius beyond which the radial heat density at time `t` is negligible.
pub(crate) fn radial_extent(k: f64, t: f64) -> f64 {
    let kk = k.abs();
    // in unit-curvature variables the density behaves like exp(-(s - t)^2 / 4t)
    let tt = kk * t;
    (tt + (4.0 * tt * TRUNCATION_EFOLDS).sqrt() + 2.0) / kk.sqrt()
}

/// Total mass `int_0^R k_t(s) 2 pi sinh(sqrt|K| s)/sqrt|K| ds`, with `R` the
/// smaller of the radial extent and `quad_cutoff`.
pub fn kernel_mass(t: f64, params: &ModelPlaneParams) -> Result<f64> {
    check_t_eta(t, 0.0)?;
    params.validate()?;
    let upper = radial_extent(params.k, t).min(params.quad_cutoff);
    let peak = (params.k.abs() * t) / params.k.abs().sqrt();
    radial_integral(params, 0.0, upper, peak, |s| model_log_kernel(t, s, params))
}

/// Integrates `exp(f(s)) * circumference(s)` over `[lo, hi]`, with `f`
/// fallible. A breakpoint is placed at `hint` when it lies inside.
pub(crate) fn radial_integral(
    params: &ModelPlaneParams,
    lo: f64,
    hi: f64,
    hint: f64,
    log_density: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    radial_log_integral(params, lo, hi, hint, 0.0, log_density).map(f64::exp)
}

/// Like [`radial_integral`] but returns the logarithm, with the integrand
/// scaled by `exp(-shift)` during integration to avoid underflow.
pub(crate) fn radial_log_integral(
    params: &ModelPlaneParams,
    lo: f64,
    hi: f64,
    hint: f64,
    shift: f64,
    log_density: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let first_err = std::cell::RefCell::new(None);
    let integrand = |s: f64| -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match log_density(s) {
            Ok(v) => (v + ln_circumference(params.k, s) - shift).exp(),
            Err(e) => {
                first_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut breaks = vec![lo];
    let n_pieces = 8;
    let mid = if hint > lo && hint < hi { Some(hint) } else { None };
    for k in 1..n_pieces {
        let x = lo + (hi - lo) * k as f64 / n_pieces as f64;
        breaks.push(x);
    }
    if let Some(m) = mid {
        breaks.push(m);
        breaks.sort_by(f64::total_cmp);
    }
    breaks.push(hi);
    let cfg = QuadConfig {
        rel_tol: params.rel_tol.max(1e-12),
        abs_tol: 0.0,
        max_intervals: params.quad_points,
    };
    let res = integrate_with_breaks(integrand, &breaks, &cfg);
    if let Some(e) = first_err.into_inner() {
        return Err(e);
    }
    let v = res?.value;
    Ok(v.ln() + shift)
}

/// Radial convolution `int k_t(s) k_u(s) dA(s)`, which equals `k_{t+u}(0)`.
pub fn convolution_at_origin(t: f64, u: f64, params: &ModelPlaneParams) -> Result<f64> {
    check_t_eta(t, 0.0)?;
    check_t_eta(u, 0.0)?;
    let upper = radial_extent(params.k, t.max(u)).min(params.quad_cutoff);
    radial_integral(params, 0.0, upper, 0.0, |s| {
        Ok(model_log_kernel(t, s, params)? + model_log_kernel(u, s, params)?)
    })
}

/// `ln g_1(t, eta)` with `g_1 = (1/t)(1+eta)/sqrt(1+eta+t) exp(-t/4 - eta/2 - eta^2/4t)`.
pub fn davies_lower_log(t: f64, eta: f64) -> f64 {
    -t.ln() + (1.0 + eta).ln() - 0.5 * (1.0 + eta + t).ln() - t / 4.0 - eta / 2.0
        - eta * eta / (4.0 * t)
}

/// Davies lower-bound shape `g_1(t, eta)` for curvature -1.
pub fn davies_lower(t: f64, eta: f64) -> f64 {
    davies_lower_log(t, eta).exp()
}

/// `g_{|K|}(t, eta) = |K| g_1(|K| t, sqrt|K| eta)`.
pub fn davies_lower_scaled(k: f64, t: f64, eta: f64) -> f64 {
    davies_lower_scaled_log(k, t, eta).exp()
}

pub fn davies_lower_scaled_log(k: f64, t: f64, eta: f64) -> f64 {
    let kk = k.abs();
    kk.ln() + davies_lower_log(kk * t, kk.sqrt() * eta)
}

/// `ln[(1/t)(1 + d^2/t) exp(-d^2/4t)]`.
pub fn gaussian_upper_log(t: f64, d: f64) -> f64 {
    -t.ln() + (d * d / t).ln_1p() - d * d / (4.0 * t)
}

/// Gaussian upper-bound shape `(1/t)(1 + d^2/t) exp(-d^2/4t)`.
pub fn gaussian_upper(t: f64, d: f64) -> f64 {
    gaussian_upper_log(t, d).exp()
}

fn check_curvature(k: f64) -> Result<()> {
    if !(k < 0.0) || !k.is_finite() {
        return Err(Error::InvalidParams(format!("curvature must be negative, got {k}")));
    }
    Ok(())
}

/// Area `(4 pi/|K|) sinh^2(sqrt|K| r / 2)` of a radius-`r` disc.
pub fn ball_volume(k: f64, r: f64) -> Result<f64> {
    check_curvature(k)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("radius must be >= 0, got {r}")));
    }
    let kk = k.abs();
    let s = (0.5 * kk.sqrt() * r).sinh();
    Ok(4.0 * PI / kk * s * s)
}

/// Disc area as `int_0^r 2 pi sinh(sqrt|K| s)/sqrt|K| ds`, by quadrature.
pub fn ball_volume_by_quadrature(k: f64, r: f64) -> Result<f64> {
    check_curvature(k)?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("radius must be >= 0, got {r}")));
    }
    let sk = k.abs().sqrt();
    let cfg = QuadConfig { rel_tol: 1e-14, abs_tol: 0.0, max_intervals: 512 };
    Ok(integrate(|s| 2.0 * PI * (sk * s).sinh() / sk, 0.0, r, &cfg)?.value)
}

/// Lattice-point count shape `(C0/(|K| rho^2)) e^{2 eta sqrt|K|}`.
pub fn lattice_count_bound(k: f64, rho: f64, eta: f64, c0: f64) -> Result<f64> {
    check_curvature(k)?;
    if !(rho > 0.0) || !(eta >= 0.0) || !(c0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need rho > 0, eta >= 0, C0 > 0; got {rho}, {eta}, {c0}"
        )));
    }
    let kk = k.abs();
    Ok(c0 / (kk * rho * rho) * (2.0 * eta * kk.sqrt()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> ModelPlaneParams {
        ModelPlaneParams::default()
    }

    // Plain evaluation in s = rho + u^2, no log scaling, used as an oracle.
    fn kernel_direct(t: f64, rho: f64, kappa: f64) -> f64 {
        // curvature -kappa^2 kernel:
        // kappa sqrt2 e^{-kappa^2 t/4} (4 pi t)^{-3/2} int_rho^inf s e^{-s^2/4t} / sqrt(cosh(kappa s) - cosh(kappa rho)) ds
        let f = |u: f64| {
            let s = rho + u * u;
            let diff = 2.0 * (kappa * (s + rho) / 2.0).sinh() * (kappa * u * u / 2.0).sinh();
            if diff <= 0.0 {
                return 0.0;
            }
            2.0 * u * s * (-s * s / (4.0 * t)).exp() / diff.sqrt()
        };
        let cfg = QuadConfig { rel_tol: 1e-12, abs_tol: 0.0, max_intervals: 2000 };
        let upper = (40.0 * t).sqrt() * 3.0;
        let i = integrate(f, 0.0, upper, &cfg).unwrap().value;
        kappa * 2f64.sqrt() * (-kappa * kappa * t / 4.0).exp() / (4.0 * PI * t).powf(1.5) * i
    }

    #[test]
    fn davies_lower_values() {
        assert!((davies_lower(1.0, 0.0) - 0.550_695_314_903_183_7).abs() < 1e-15);
        assert!((davies_lower_scaled(-4.0, 1.0, 1.0) - 4.0 * davies_lower(4.0, 2.0)).abs() < 1e-15);
        assert!(davies_lower(1.0, 50.0) < 1e-250);
    }

    #[test]
    fn gaussian_upper_values() {
        assert!((gaussian_upper(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((gaussian_upper(4.0, 4.0) - 0.459_849_301_464_302_9).abs() < 1e-15);
        let t: f64 = 2.0;
        // (1 + u) e^{-u/4} decreases for u = d^2/t >= 3
        let d0 = (3.0 * t).sqrt();
        let vals: Vec<f64> = (0..5).map(|i| gaussian_upper(t, d0 + i as f64 * 0.7)).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn kernel_reference_values() {
        // 40-digit evaluations of the integral representation
        let k0 = h2_kernel(1.0, 0.0, &p()).unwrap();
        assert!((k0 / 0.057_535_755_205_721_975 - 1.0).abs() < 1e-9, "{k0}");
        let k5 = h2_kernel(1.0, 5.0, &p()).unwrap();
        assert!((k5 / 2.987_576_265_781_434e-5 - 1.0).abs() < 1e-9, "{k5}");
        let k10 = h2_kernel(1.0, 10.0, &p()).unwrap();
        assert!((k10 / 2.536_432_581_005_767e-14 - 1.0).abs() < 1e-9, "{k10}");
        assert!(k5 < k0 && k10 < k5);
    }

    #[test]
    fn kernel_matches_direct_integral() {
        for &(t, rho) in &[(0.5, 0.0), (1.0, 0.3), (2.0, 3.0), (4.0, 6.0), (8.0, 12.0)] {
            let a = h2_kernel(t, rho, &p()).unwrap();
            let b = kernel_direct(t, rho, 1.0);
            assert!((a / b - 1.0).abs() < 1e-8, "t={t} rho={rho}: {a} vs {b}");
        }
    }

    #[test]
    fn curvature_rescaling() {
        let params = ModelPlaneParams::with_curvature(-4.0).unwrap();
        let samples = [
            (0.5, 0.0), (0.5, 1.0), (1.0, 0.2), (1.0, 2.0), (1.5, 0.7),
            (2.0, 1.3), (2.0, 4.0), (3.0, 2.5), (4.0, 5.0), (5.0, 7.5),
        ];
        for &(t, eta) in &samples {
            let a = model_kernel(t, eta, &params).unwrap();
            let b = kernel_direct(t, eta, 2.0);
            assert!((a / b - 1.0).abs() < 1e-8, "t={t} eta={eta}: {a} vs {b}");
        }
    }

    #[test]
    fn radial_monotonicity() {
        for t in [0.5, 1.0, 4.0] {
            let vals: Vec<f64> = [0.0, 0.5, 2.0, 8.0]
                .iter()
                .map(|&e| h2_kernel(t, e, &p()).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
        }
    }

    #[test]
    fn mass_conservation() {
        for k in [-1.0, -4.0] {
            let params = ModelPlaneParams::with_curvature(k).unwrap();
            for t in [1.0, 2.0, 4.0] {
                let m = kernel_mass(t, &params).unwrap();
                assert!((m - 1.0).abs() < 1e-8, "K={k} t={t}: {m}");
            }
        }
    }

    #[test]
    fn semigroup_at_origin() {
        for (t, u) in [(1.0, 1.0), (0.5, 1.5), (2.0, 1.0)] {
            let conv = convolution_at_origin(t, u, &p()).unwrap();
            let direct = h2_kernel(t + u, 0.0, &p()).unwrap();
            assert!((conv / direct - 1.0).abs() < 1e-4, "{conv} vs {direct}");
        }
    }

    #[test]
    fn large_distance_log_domain() {
        let l = h2_log_kernel(0.5, 60.0, &p()).unwrap();
        assert!(l.is_finite() && l < -1700.0);
    }

    #[test]
    fn ball_volume_values() {
        assert_eq!(ball_volume(-1.0, 0.0).unwrap(), 0.0);
        assert!((ball_volume(-1.0, 2.0).unwrap() - 17.355_387_381_771_433).abs() < 1e-12);
        let q = ball_volume_by_quadrature(-1.0, 2.0).unwrap();
        assert!((q / 17.355_387_381_771_433 - 1.0).abs() < 1e-12);
        assert!(ball_volume(0.0, 1.0).is_err());
    }

    #[test]
    fn lattice_count_values() {
        assert!((lattice_count_bound(-1.0, 1.0, 1.0, 1.0).unwrap() - 1f64.exp().powi(2)).abs() < 1e-12);
        let base = lattice_count_bound(-2.0, 0.5, 0.0, 3.0).unwrap();
        assert!((base - 3.0 / (2.0 * 0.25)).abs() < 1e-12);
        let e1 = lattice_count_bound(-2.0, 0.5, 1.5, 3.0).unwrap() / base;
        let e2 = lattice_count_bound(-2.0, 0.5, 3.0, 3.0).unwrap() / base;
        assert!((e2 / (e1 * e1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(h2_kernel(0.0, 1.0, &p()), Err(Error::InvalidTime(_))));
        let bad = ModelPlaneParams { quad_points: 10, ..p() };
        assert!(h2_kernel(1.0, 1.0, &bad).is_err());
        assert!(ModelPlaneParams::with_curvature(0.5).is_err());
    }
}
