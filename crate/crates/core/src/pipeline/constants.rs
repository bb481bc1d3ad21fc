use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid step used when searching for the cutoff constants.
pub const CONSTANT_GRID_STEP: f64 = 0.5;

/// The cutoff constants and the net-scale constant `c`, chosen in order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantChoice {
    pub b: f64,
    pub c2: f64,
    /// Cutoff-radius constant (multiplies `r2`).
    pub chi_cut: f64,
    /// Heat-kernel truncation constant.
    pub heat_cut: f64,
    /// Net-scale constant in `r1 = c log log vol`, `r2 = c log vol`.
    pub c: f64,
}

/// Each of the four admissibility conditions, checked by substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantVerdicts {
    pub chi_cut_ok: bool,
    pub heat_cut_quadratic_ok: bool,
    pub heat_cut_floor_ok: bool,
    pub c_ok: bool,
}

impl ConstantVerdicts {
    pub fn all(&self) -> bool {
        self.chi_cut_ok && self.heat_cut_quadratic_ok && self.heat_cut_floor_ok && self.c_ok
    }
}

fn chi_cut_condition(chi: f64, b: f64, c2: f64) -> bool {
    let sb = b.abs().sqrt();
    let rhs = (5.0 * b.abs() + 2.0 * chi * sb + chi)
        .max(32.0 * sb + 16.0)
        .max(-4.0 * c2.ln() + 1.0);
    chi * chi / 32.0 >= rhs
}

fn heat_cut_quadratic(heat: f64, b: f64, c2: f64) -> bool {
    heat * heat / 64.0 >= b.abs() + 25.0 * (1.0 + b.abs()) * (1.0 + heat) - 2.0 * c2.ln()
}

fn heat_cut_floor(heat: f64, b: f64) -> bool {
    heat >= (8.0 * b.abs().sqrt() + 4.0).max(16.0)
}

/// The quantity `3 chi sqrt|b| - 4 log C2 + 25 (1 + |b|)(1 + heat)` bounding `c`.
fn c_denominator(chi: f64, heat: f64, b: f64, c2: f64) -> f64 {
    3.0 * chi * b.abs().sqrt() - 4.0 * c2.ln() + 25.0 * (1.0 + b.abs()) * (1.0 + heat)
}

fn smallest_on_grid(pred: impl Fn(f64) -> bool) -> f64 {
    let mut k = 1u64;
    loop {
        let x = k as f64 * CONSTANT_GRID_STEP;
        if pred(x) {
            return x;
        }
        k += 1;
    }
}

/// Chooses `chi_cut`, then `heat_cut` (smallest grid values satisfying
/// their conditions), then the largest `c` with
/// `c * (3 chi sqrt|b| - 4 log C2 + 25(1+|b|)(1+heat)) <= 1/4`.
///
/// `b` is the curvature lower bound, `c2 in (0, 1)` a lower bound on the
/// heat-semigroup eigenvalue at unit time.
pub fn assemble_constants(b: f64, c2: f64) -> Result<ConstantChoice> {
    if !(b < 0.0) || !b.is_finite() {
        return Err(Error::InvalidParams(format!("need b < 0, got {b}")));
    }
    if !(c2 > 0.0 && c2 < 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < C2 < 1, got {c2}")));
    }
    let chi_cut = smallest_on_grid(|chi| chi_cut_condition(chi, b, c2));
    let heat_cut = smallest_on_grid(|h| heat_cut_quadratic(h, b, c2) && heat_cut_floor(h, b));
    let denom = c_denominator(chi_cut, heat_cut, b, c2);
    let mut c = 0.25 / denom;
    // step down to the nearest double satisfying the product bound exactly
    while c * denom > 0.25 {
        c = f64::from_bits(c.to_bits() - 1);
    }
    Ok(ConstantChoice {
        b,
        c2,
        chi_cut,
        heat_cut,
        c,
    })
}

impl ConstantChoice {
    pub fn verify(&self) -> ConstantVerdicts {
        ConstantVerdicts {
            chi_cut_ok: chi_cut_condition(self.chi_cut, self.b, self.c2),
            heat_cut_quadratic_ok: heat_cut_quadratic(self.heat_cut, self.b, self.c2),
            heat_cut_floor_ok: heat_cut_floor(self.heat_cut, self.b),
            c_ok: self.c > 0.0
                && self.c * c_denominator(self.chi_cut, self.heat_cut, self.b, self.c2) <= 0.25,
        }
    }
}
