//! Ordinary least-squares line fits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the residuals `y - (slope x + intercept)`.
    pub rms_residual: f64,
    /// Largest absolute residual.
    pub max_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::Fit("abscissae are degenerate".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let res: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let rms_residual = (res.iter().map(|r| r * r).sum::<f64>() / n).sqrt();
    let max_residual = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(LinearFit { slope, intercept, rms_residual, max_residual })
}

/// Slope of `ln|y|` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.iter().any(|&x| x <= 0.0) || ys.iter().any(|&y| y == 0.0) {
        return Err(Error::Fit("log-log fit needs x > 0 and y != 0".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept + 1.0).abs() < 1e-15);
        assert!(f.max_residual < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(linear_fit(&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
