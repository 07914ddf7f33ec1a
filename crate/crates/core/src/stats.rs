// SPDX-License-Identifier: Apache-2.0

//! Small least-squares helpers shared by the fitting and scaling checks.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination.
    pub r_squared: T,
}

/// Ordinary least-squares line through `(xs[k], ys[k])`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { what: "fit abscissae vs ordinates", left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::Numeric("a line fit needs at least two points".into()));
    }
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == T::zero() {
        return Err(Error::Numeric("line fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == T::zero() { T::one() } else { sxy * sxy / (sxx * syy) };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

/// Line fit of `ln y` against `ln x`; all values must be positive.
pub fn log_log_fit<T: Real>(xs: &[T], ys: &[T]) -> Result<LineFit<T>> {
    if xs.iter().chain(ys).any(|v| !(*v > T::zero())) {
        return Err(Error::Numeric("log-log fit needs positive values".into()));
    }
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line() {
        let f = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert_relative_eq!(f.slope, 2.0, epsilon = 1e-14);
        assert_relative_eq!(f.intercept, 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn power_law_slope() {
        let xs = [0.01, 0.02, 0.04, 0.08];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert_relative_eq!(log_log_fit(&xs, &ys).unwrap().slope, 2.0, epsilon = 1e-12);
        assert!(log_log_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
