//! Least-squares fits for the saturation ensembles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `π = 1 - exp(α₀ - α·d)`, fitted as `ln(1-π) = α₀ - α·d`.
    ExpSaturation,
    /// `π̄ = c₀ + c_β·β + c_α·α`.
    LinearMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub kind: ModelKind,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// `1 - SSR/SST` of the fitted (linearized) response; 0 when degenerate.
    pub r_squared: f64,
    pub residuals: Vec<f64>,
    pub rows: usize,
    /// Rows dropped before fitting.
    pub excluded: usize,
    /// Constant response or too few rows to fit.
    pub degenerate: bool,
}

/// OLS of `y` on the columns of `x` (an intercept column is prepended).
pub fn ols(x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>, f64, bool) {
    let rows = y.len();
    let p = x.first().map_or(0, Vec::len) + 1;
    if rows < p {
        return (vec![], vec![], 0.0, true);
    }
    let design = DMatrix::from_fn(rows, p, |r, c| if c == 0 { 1.0 } else { x[r][c - 1] });
    let target = DVector::from_column_slice(y);
    let beta = design.clone().svd(true, true).solve(&target, 1e-12).expect("svd has both factors");
    let fitted = &design * &beta;
    let residuals: Vec<f64> = target.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let (r2, degenerate) = r_squared(y, &residuals);
    (beta.iter().copied().collect(), residuals, r2, degenerate)
}

/// `1 - SSR/SST`, clamped to `[0, 1]`; zero with the degenerate flag when SST is 0.
pub fn r_squared(y: &[f64], residuals: &[f64]) -> (f64, bool) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    if sst <= f64::EPSILON * y.len() as f64 * mean.abs().max(1.0) {
        return (0.0, true);
    }
    ((1.0 - ssr / sst).clamp(0.0, 1.0), false)
}

/// Fits `ln(1-π) = α₀ - α·d` on rows with `π < 1 - 1e-9`.
pub fn fit_exp_saturation(degree: &[f64], pi: &[f64]) -> RegressionResult {
    let keep: Vec<usize> = (0..pi.len()).filter(|&k| pi[k] < 1.0 - 1e-9).collect();
    let x: Vec<Vec<f64>> = keep.iter().map(|&k| vec![degree[k]]).collect();
    let y: Vec<f64> = keep.iter().map(|&k| (1.0 - pi[k]).ln()).collect();
    let (beta, residuals, r2, degenerate) = ols(&x, &y);
    let coefficients = if beta.is_empty() { vec![] } else { vec![beta[0], -beta[1]] };
    RegressionResult {
        kind: ModelKind::ExpSaturation,
        names: vec!["alpha0".into(), "alpha".into()],
        coefficients,
        r_squared: r2,
        residuals,
        rows: keep.len(),
        excluded: pi.len() - keep.len(),
        degenerate,
    }
}

/// Fits `π̄ = c₀ + c_β·β + c_α·α` over grid cells.
pub fn fit_linear_mean(beta: &[f64], alpha: &[f64], mean_pi: &[f64]) -> RegressionResult {
    let x: Vec<Vec<f64>> = beta.iter().zip(alpha).map(|(&b, &a)| vec![b, a]).collect();
    let (coefficients, residuals, r2, degenerate) = ols(&x, mean_pi);
    RegressionResult {
        kind: ModelKind::LinearMean,
        names: vec!["intercept".into(), "beta".into(), "alpha".into()],
        coefficients,
        r_squared: r2,
        residuals,
        rows: mean_pi.len(),
        excluded: 0,
        degenerate,
    }
}
