use crate::error::{Result, ShamError};
use crate::par;
use crate::problem::{ConstraintOracle, ObjectiveOracle, ProblemInstance, SimpleSet};
use crate::solver::{run, RunOutcome, SolverConfig};
use crate::Point;

use super::rate::{log_log_slope, RateQuantity};

/// How independent runs are dispatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// [`par::map`]: rayon when the `parallel` feature is on.
    Parallel,
    Sequential,
}

/// Runs `config` once per seed (overriding `config.seed`). Results come back
/// in seed order and are identical for both backends.
pub fn run_seeds<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    config: &SolverConfig,
    x0: &Point,
    seeds: &[u64],
    backend: Backend,
) -> Result<Vec<RunOutcome>>
where
    F: ObjectiveOracle + Sync,
    C: ConstraintOracle + Sync,
    Y: SimpleSet + Sync,
{
    if seeds.is_empty() {
        return Err(ShamError::InvalidInput("need at least one seed".into()));
    }
    let one = |&seed: &u64| {
        let mut cfg = config.clone();
        cfg.seed = seed;
        run(instance, &cfg, x0)
    };
    let outcomes = match backend {
        Backend::Parallel => par::map(seeds, one),
        Backend::Sequential => par::map_sequential(seeds, one),
    };
    outcomes.into_iter().collect()
}

/// Per-record mean of `quantity` across runs. Every run must have recorded
/// the same iteration indices (true for full-budget runs of one config).
pub fn mean_curve(outcomes: &[RunOutcome], quantity: RateQuantity) -> Result<Vec<(usize, f64)>> {
    let first = outcomes
        .first()
        .ok_or_else(|| ShamError::InvalidInput("no runs to average".into()))?;
    let mut curve: Vec<(usize, f64)> = first.records.iter().map(|r| (r.k, 0.0)).collect();
    for out in outcomes {
        if out.records.len() != curve.len() {
            return Err(ShamError::InvalidData("runs recorded different iterations".into()));
        }
        for (slot, r) in curve.iter_mut().zip(&out.records) {
            if slot.0 != r.k {
                return Err(ShamError::InvalidData("runs recorded different iterations".into()));
            }
            slot.1 += quantity.of(r);
        }
    }
    let n = outcomes.len() as f64;
    curve.iter_mut().for_each(|p| p.1 /= n);
    Ok(curve)
}

/// Log-log slope of a mean curve over `k_min <= k <= k_max`.
pub fn curve_slope(curve: &[(usize, f64)], k_min: usize, k_max: usize) -> Result<f64> {
    let points: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(k, _)| *k >= k_min && *k <= k_max)
        .map(|&(k, v)| (k as f64, v))
        .collect();
    log_log_slope(&points)
}

/// Mean value of the curve at iteration `k`, if recorded.
pub fn curve_at(curve: &[(usize, f64)], k: usize) -> Option<f64> {
    curve.iter().find(|(kk, _)| *kk == k).map(|p| p.1)
}
