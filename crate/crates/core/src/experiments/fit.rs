use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::estimators::Estimate;

/// A log-log power-law fit `value ≈ C * lambda^slope`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% confidence interval for the slope.
    pub ci: (f64, f64),
    pub r_squared: f64,
    pub n_used: usize,
}

impl Fit {
    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci.0 <= x && x <= self.ci.1
    }
}

/// Weighted least squares of `ln value` on `ln lambda`.
///
/// Only rows with `value > 4 * std_error` enter the fit. Each row is weighted
/// by `(value / std_error)^2`, the inverse variance of `ln value` to first
/// order. The slope's standard error is inflated by the reduced chi-square
/// when the scatter exceeds the reported errors, never deflated. If any used
/// row has zero error the fit falls back to ordinary least squares.
pub fn fit_exponent(rows: &[(f64, Estimate)]) -> Result<Fit> {
    let used: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|(l, e)| *l > 0.0 && e.value > 0.0 && e.value > 4.0 * e.std_error)
        .map(|(l, e)| (l.ln(), e.value.ln(), e.std_error / e.value))
        .collect();
    let n = used.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 signal-dominated rows, got {n}")));
    }
    let weighted = used.iter().all(|r| r.2 > 0.0);
    let w: Vec<f64> = used.iter().map(|r| if weighted { 1.0 / (r.2 * r.2) } else { 1.0 }).collect();
    let sw: f64 = w.iter().sum();
    let xm = used.iter().zip(&w).map(|(r, w)| w * r.0).sum::<f64>() / sw;
    let ym = used.iter().zip(&w).map(|(r, w)| w * r.1).sum::<f64>() / sw;
    let sxx: f64 = used.iter().zip(&w).map(|(r, w)| w * (r.0 - xm).powi(2)).sum();
    let sxy: f64 = used.iter().zip(&w).map(|(r, w)| w * (r.0 - xm) * (r.1 - ym)).sum();
    let syy: f64 = used.iter().zip(&w).map(|(r, w)| w * (r.1 - ym).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("all usable rows share one lambda".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = used.iter().zip(&w).map(|(r, w)| w * (r.1 - intercept - slope * r.0).powi(2)).sum();
    let df = (n - 2) as f64;
    let scale = if weighted { (rss / df).max(1.0) } else { rss / df };
    let slope_se = (scale / sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Fit(e.to_string()))?.inverse_cdf(0.975);
    let r_squared = if syy > 0.0 { (1.0 - rss / syy).max(0.0) } else { 1.0 };
    Ok(Fit { slope, intercept, slope_se, ci: (slope - q * slope_se, slope + q * slope_se), r_squared, n_used: n })
}
