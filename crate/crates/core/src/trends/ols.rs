//! Ordinary least squares on (period index, value) pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Closed-form simple linear regression. A series with no variance in y is
/// a perfect fit (r² = 1).
pub fn fit_ols(points: &[(f64, f64)]) -> Result<OlsFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit(format!("need at least 2 points, got {n}")));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("regression input contains a non-finite value".into()));
    }
    let nf = n as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|(x, _)| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all x values are equal".into()));
    }
    let sxy: f64 = points.iter().map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = points.iter().map(|(_, y)| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(OlsFit { slope, intercept, r_squared, n })
}

/// Predictions for the `horizon` indices after `last_index`, optionally
/// clamped to `bounds`.
pub fn forecast_ols(fit: &OlsFit, last_index: f64, horizon: usize, bounds: Option<(f64, f64)>) -> Vec<f64> {
    (1..=horizon)
        .map(|h| {
            let y = fit.predict(last_index + h as f64);
            bounds.map_or(y, |(lo, hi)| y.clamp(lo, hi))
        })
        .collect()
}
