//! Closed-form scalar bounds and counting formulas.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Curvature pinching `b <= a < 0` and injectivity radius `rho > 0`, with
/// optional global data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub g: i64,
    pub vol: Option<f64>,
    pub delta: Option<f64>,
}

impl SurfaceParams {
    pub fn validate(&self) -> Result<()> {
        check_pinching(self.a, self.b, self.rho)?;
        if self.g < 2 {
            return Err(Error::InvalidGenus(self.g));
        }
        if let Some(v) = self.vol {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!("volume must be positive, got {v}")));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(Error::InvalidParams(format!("spectral gap must be positive, got {d}")));
            }
        }
        Ok(())
    }

    /// False when the volume exceeds the area cap `4 pi (g-1)/|a|`.
    pub fn volume_consistent(&self) -> bool {
        match self.vol {
            Some(v) => v <= gauss_bonnet_volume_cap(self.g, self.a).unwrap_or(f64::INFINITY),
            None => true,
        }
    }
}

fn check_pinching(a: f64, b: f64, rho: f64) -> Result<()> {
    if !(b <= a && a < 0.0) || !b.is_finite() {
        return Err(Error::InvalidParams(format!("need b <= a < 0, got a = {a}, b = {b}")));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParams(format!("need rho > 0, got {rho}")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParams(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// `C0 g / log log(1 + g)`.
pub fn multiplicity_bound_genus(g: i64, c0: f64) -> Result<f64> {
    if g < 2 {
        return Err(Error::InvalidGenus(g));
    }
    check_positive("C0", c0)?;
    let g = g as f64;
    Ok(c0 * g / (1.0 + g).ln().ln())
}

/// `C0 (1 + vol / log log(3 + vol))`.
pub fn multiplicity_bound_volume(vol: f64, c0: f64) -> Result<f64> {
    check_positive("vol", vol)?;
    check_positive("C0", c0)?;
    Ok(c0 * (1.0 + vol / (3.0 + vol).ln().ln()))
}

/// Structural parts of the constants: `(|b| + rho^-2)/|a|` and, given a
/// spectral gap, `max(sqrt(delta)/sqrt(20), delta/(4 sqrt|b|)) / (sqrt|b| + 1/rho)`.
/// The universal multipliers are left as 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemarkConstants {
    pub c0_factor: f64,
    pub alpha_factor: Option<f64>,
}

pub fn remark_constants(a: f64, b: f64, rho: f64, delta: Option<f64>) -> Result<RemarkConstants> {
    check_pinching(a, b, rho)?;
    let c0_factor = (b.abs() + rho.powi(-2)) / a.abs();
    let alpha_factor = match delta {
        Some(d) => {
            check_positive("delta", d)?;
            let sep = (d.sqrt() / 20f64.sqrt()).max(d / (4.0 * b.abs().sqrt()));
            Some(sep / (b.abs().sqrt() + 1.0 / rho))
        }
        None => None,
    };
    Ok(RemarkConstants { c0_factor, alpha_factor })
}

/// `vol (kappa + inj^-2)`.
pub fn scale_free_quantity(vol: f64, kappa: f64, inj: f64) -> Result<f64> {
    check_positive("vol", vol)?;
    check_positive("inj", inj)?;
    if !(kappa >= 0.0) {
        return Err(Error::InvalidParams(format!("kappa must be >= 0, got {kappa}")));
    }
    Ok(vol * (kappa + 1.0 / (inj * inj)))
}

/// `4 pi (g - 1) / |a|`.
pub fn gauss_bonnet_volume_cap(g: i64, a: f64) -> Result<f64> {
    if g < 2 {
        return Err(Error::InvalidGenus(g));
    }
    if !(a < 0.0) {
        return Err(Error::InvalidParams(format!("need a < 0, got {a}")));
    }
    Ok(4.0 * PI * (g - 1) as f64 / a.abs())
}

fn isqrt(x: i64) -> i64 {
    let mut r = (x as f64).sqrt() as i64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// `floor((7 + sqrt(1 + 48 g)) / 2)` for a closed orientable surface of genus `g`.
pub fn chromatic_number(g: i64) -> Result<i64> {
    if g < 0 {
        return Err(Error::InvalidGenus(g));
    }
    // floor((7 + sqrt m)/2) = floor((7 + isqrt m)/2) since isqrt is the floor
    // and 7 + isqrt m is an integer
    Ok((7 + isqrt(1 + 48 * g)) / 2)
}

/// The same number from the Euler characteristic form
/// `floor((7 + sqrt(49 - 24 chi)) / 2)`, in floating point.
pub fn chromatic_number_from_euler(chi: i64) -> f64 {
    ((7.0 + ((49 - 24 * chi) as f64).sqrt()) / 2.0).floor()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureTarget {
    pub genus: i64,
    pub target: i64,
    /// Genera at which the equality `m_2 = chr - 1` is known to fail.
    pub conjecture_disproven: bool,
}

/// `chr(g) - 1`.
pub fn cdv_conjecture_target(g: i64) -> Result<ConjectureTarget> {
    Ok(ConjectureTarget {
        genus: g,
        target: chromatic_number(g)? - 1,
        conjecture_disproven: g == 10 || g == 17,
    })
}

/// `floor((1 + sqrt(8 g + 1)) / 2)`, a realized multiplicity for `g >= 3`.
pub fn colbois_cdv_lower(g: i64) -> Result<i64> {
    if g < 3 {
        return Err(Error::InvalidGenus(g));
    }
    Ok((1 + isqrt(8 * g + 1)) / 2)
}

/// `(2/sqrt|b|) asinh(1)`, the radius whose disc has area `4 pi/|b|`.
pub fn diameter_lower_bound(b: f64) -> Result<f64> {
    if !(b < 0.0) || !b.is_finite() {
        return Err(Error::InvalidParams(format!("need b < 0, got {b}")));
    }
    Ok(2.0 / b.abs().sqrt() * 1f64.asinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowBound {
    /// Upper end of the window relative to `lambda_j`: `1 + K / log^beta g`.
    pub lo_hi_factor: f64,
    /// `C0 g / log log g`.
    pub bound: f64,
}

pub fn window_bound(g: i64, k: f64, beta: f64, c0: f64) -> Result<WindowBound> {
    if g < 3 {
        return Err(Error::InvalidGenus(g));
    }
    check_positive("K", k)?;
    check_positive("beta", beta)?;
    check_positive("C0", c0)?;
    let gf = g as f64;
    Ok(WindowBound {
        lo_hi_factor: 1.0 + k / gf.ln().powf(beta),
        bound: c0 * gf / gf.ln().ln(),
    })
}
