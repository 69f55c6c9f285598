//! Power-law fits `|y| = c x^k` by least squares on logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub exponent_err: f64,
    pub coefficient: f64,
    pub coefficient_err: f64,
    /// `ln c`, with the same standard error as a plain intercept.
    pub intercept: f64,
    pub intercept_err: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Common sign of the `y` values.
    pub sign: f64,
}

/// Unweighted fit of `ln|y|` against `ln x`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    fit(points, None)
}

/// Fit weighted by `(y / err)^2`, the inverse variance of `ln|y|`.
pub fn power_law_fit_weighted(points: &[(f64, f64)], errors: &[f64]) -> Result<FitResult> {
    if errors.len() != points.len() {
        return Err(Error::InvalidArgument(format!("{} errors for {} points", errors.len(), points.len())));
    }
    let weights = points
        .iter()
        .zip(errors)
        .map(|(&(_, y), &e)| {
            if e > 0.0 && e.is_finite() {
                Ok((y / e).powi(2))
            } else {
                Err(Error::InvalidArgument(format!("error estimate {e} must be positive")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    fit(points, Some(&weights))
}

fn fit(points: &[(f64, f64)], weights: Option<&[f64]>) -> Result<FitResult> {
    let n = points.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!("{n} points, need at least {MIN_FIT_POINTS}")));
    }
    let sign = common_sign(points)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);

    let sw: f64 = (0..n).map(w).sum();
    let mx = (0..n).map(|i| w(i) * xs[i]).sum::<f64>() / sw;
    let my = (0..n).map(|i| w(i) * ys[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| w(i) * (xs[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| w(i) * (xs[i] - mx) * (ys[i] - my)).sum();
    let syy: f64 = (0..n).map(|i| w(i) * (ys[i] - my).powi(2)).sum();
    if !(sxx > 1e-300) {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..n).map(|i| w(i) * (ys[i] - intercept - slope * xs[i]).powi(2)).sum();
    let dof = (n - 2) as f64;
    let s2 = ss_res / dof;
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (1.0 / sw + mx * mx / sxx)).sqrt();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    let coefficient = intercept.exp();
    Ok(FitResult {
        exponent: slope,
        exponent_err: slope_err,
        coefficient,
        coefficient_err: coefficient * intercept_err,
        intercept,
        intercept_err,
        r_squared,
        n_points: n,
        sign,
    })
}

fn common_sign(points: &[(f64, f64)]) -> Result<f64> {
    let mut sign = 0.0;
    for &(x, y) in points {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidArgument(format!("x = {x} must be positive")));
        }
        if y == 0.0 || !y.is_finite() {
            return Err(Error::InvalidArgument(format!("y = {y} must be nonzero and finite")));
        }
        if sign == 0.0 {
            sign = y.signum();
        } else if y.signum() != sign {
            return Err(Error::DegenerateFit("y values change sign".into()));
        }
    }
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..=10).map(|i| (i as f64, 2.0 * (i as f64).powi(3))).collect();
        let f = power_law_fit(&pts).unwrap();
        assert!((f.exponent - 3.0).abs() < 1e-12);
        assert!((f.coefficient - 2.0).abs() < 1e-12);
        assert!(f.exponent_err < 1e-12 && f.r_squared > 1.0 - 1e-12);
        assert_eq!(f.sign, 1.0);
    }

    #[test]
    fn negative_values_and_rejections() {
        let pts: Vec<_> = (1..=5).map(|i| (i as f64, -0.5 / i as f64)).collect();
        let f = power_law_fit(&pts).unwrap();
        assert_eq!(f.sign, -1.0);
        assert!((f.exponent + 1.0).abs() < 1e-12 && (f.coefficient - 0.5).abs() < 1e-12);

        let mut mixed = pts.clone();
        mixed[2].1 = 0.1;
        assert!(matches!(power_law_fit(&mixed), Err(Error::DegenerateFit(_))));
        assert!(power_law_fit(&pts[..2]).is_err());
        assert!(power_law_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(power_law_fit(&[(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(power_law_fit(&[(1.0, 0.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    }

    #[test]
    fn noisy_fit_has_errors() {
        let pts: Vec<_> =
            (1..=8).map(|i| (i as f64, (i as f64).powf(1.5) * (1.0 + 0.01 * (-1f64).powi(i)))).collect();
        let f = power_law_fit(&pts).unwrap();
        assert!((f.exponent - 1.5).abs() < 3.0 * f.exponent_err + 1e-3);
        assert!(f.exponent_err > 0.0 && f.r_squared < 1.0);
        let w = power_law_fit_weighted(&pts, &vec![0.01; 8]).unwrap();
        assert!(w.exponent.is_finite());
        assert!(power_law_fit_weighted(&pts, &[1.0]).is_err());
    }
}
