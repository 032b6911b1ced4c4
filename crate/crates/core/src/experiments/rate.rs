use crate::error::{Result, ShamError};

use super::RunRecord;

/// Records with `k` below this are dropped before fitting.
pub const DEFAULT_BURN_IN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateQuantity {
    /// `|f(avg) - fstar|`.
    GapAvg { fstar: f64 },
    /// `||max(0, h(avg))||^2`.
    FeasSqAvg,
}

impl RateQuantity {
    pub fn of(&self, r: &RunRecord) -> f64 {
        match *self {
            RateQuantity::GapAvg { fstar } => (r.f_avg - fstar).abs(),
            RateQuantity::FeasSqAvg => r.feas_sq_avg,
        }
    }
}

/// Least-squares slope of `ln y` against `ln k` over the given points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 10 {
        return Err(ShamError::InvalidData(format!(
            "rate fit needs at least 10 points, got {}",
            points.len()
        )));
    }
    if let Some(&(k, y)) = points.iter().find(|&&(k, y)| !(k > 0.0) || !(y > 0.0) || !y.is_finite()) {
        return Err(ShamError::InvalidData(format!(
            "non-positive value {y} at k = {k}; clamp or shrink the window"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(k, y)| (k.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(ShamError::InvalidData("all points share one k".into()));
    }
    Ok(sxy / sxx)
}

/// Empirical convergence order of `quantity` over records with `k >= k_min`.
pub fn rate_fit(records: &[RunRecord], quantity: RateQuantity, k_min: usize) -> Result<f64> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.k >= k_min && r.k > 0)
        .map(|r| (r.k as f64, quantity.of(r)))
        .collect();
    log_log_slope(&points)
}
