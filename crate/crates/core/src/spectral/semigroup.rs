use nalgebra::{DMatrix, DVector};

use super::operator::{SymmetricOperator, PSD_REL_TOL};
use super::spectrum::eigensystem;
use crate::error::{Error, Result};

/// Smallest eigenvalue of `a`, failing unless `a` is positive semidefinite
/// within `PSD_REL_TOL * (1 + ||a||)`.
pub fn require_psd(a: &SymmetricOperator) -> Result<()> {
    let sys = eigensystem(a, None)?;
    let values = sys.spectrum.values();
    let min = *values.last().expect("dim >= 1");
    let norm = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if min < -PSD_REL_TOL * (1.0 + norm) {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

/// Applies `f` to the spectrum of `a`: returns `V f(Lambda) V^T`.
pub fn functional_calculus(a: &SymmetricOperator, f: impl Fn(f64) -> f64) -> Result<SymmetricOperator> {
    let sys = eigensystem(a, None)?;
    let mapped: Vec<f64> = sys.spectrum.values().iter().map(|&v| f(v)).collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(mapped));
    SymmetricOperator::new(&sys.vectors * d * sys.vectors.transpose())
}

/// `exp(-t L)` for a positive semidefinite generator `L`.
///
/// Computed through the full eigendecomposition. `t = 0` returns the exact
/// identity.
pub fn heat_semigroup(l: &SymmetricOperator, t: f64) -> Result<SymmetricOperator> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    if !l.is_finite() {
        return Err(Error::InvalidOperator("non-finite generator".into()));
    }
    require_psd(l)?;
    if t == 0.0 {
        return SymmetricOperator::identity(l.dim());
    }
    // Clamp rounding-level negative eigenvalues so the result stays a contraction.
    functional_calculus(l, |lambda| (-t * lambda.max(0.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_gives_identity() {
        let z = SymmetricOperator::zeros(3).unwrap();
        let h = heat_semigroup(&z, 5.0).unwrap();
        assert_eq!(h, SymmetricOperator::identity(3).unwrap());
    }

    #[test]
    fn diagonal_generator() {
        let l = SymmetricOperator::diagonal(&[1.0, 2.0]).unwrap();
        let h = heat_semigroup(&l, 1.0).unwrap();
        assert!((h.get(0, 0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((h.get(1, 1) - (-2.0f64).exp()).abs() < 1e-15);
        assert!(h.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn two_path_laplacian() {
        let l = SymmetricOperator::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let h = heat_semigroup(&l, 1.0).unwrap();
        // eigenvalues 0 and 2: ((1 + e^-2)/2, (1 - e^-2)/2)
        let diag = 0.567_667_641_618_306_4;
        let off = 0.432_332_358_381_693_6;
        assert!((h.get(0, 0) - diag).abs() < 1e-14);
        assert!((h.get(1, 1) - diag).abs() < 1e-14);
        assert!((h.get(0, 1) - off).abs() < 1e-14);
        assert_eq!(h.get(0, 1), h.get(1, 0));
    }

    #[test]
    fn negative_time_rejected() {
        let l = SymmetricOperator::zeros(2).unwrap();
        assert!(matches!(heat_semigroup(&l, -1.0), Err(Error::InvalidTime(_))));
    }

    #[test]
    fn indefinite_generator_rejected() {
        let l = SymmetricOperator::diagonal(&[1.0, -0.5]).unwrap();
        assert!(matches!(heat_semigroup(&l, 1.0), Err(Error::NotPositive { .. })));
    }
}
