use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};

/// Two-branch stopping rule.
///
/// With a known optimal value: stop once `||max(0, h(x))||^2 <= feas_tol` and
/// `|f(x) - fstar| <= gap_tol`. Without one: stop once the last `window_m`
/// squared step lengths `||x_{k+1} - x_k||^2` are all `<= stagnation_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub stagnation_tol: f64,
    pub window_m: usize,
    pub fstar: Option<f64>,
    /// Iterations between evaluations of the feasibility/gap branch inside
    /// [`crate::solver::run`]; `None` means once per epoch (`m` iterations).
    pub check_every: Option<usize>,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        Self {
            feas_tol: 1e-2,
            gap_tol: 1e-2,
            stagnation_tol: 1e-3,
            window_m: 10,
            fstar: None,
            check_every: None,
        }
    }
}

impl StoppingCriteria {
    pub fn validate(&self) -> Result<()> {
        let tols = [self.feas_tol, self.gap_tol, self.stagnation_tol];
        if tols.iter().any(|t| !(*t > 0.0)) {
            return Err(ShamError::InvalidConfig("stopping tolerances must be > 0".into()));
        }
        if self.window_m == 0 {
            return Err(ShamError::InvalidConfig("window_m must be >= 1".into()));
        }
        if self.check_every == Some(0) {
            return Err(ShamError::InvalidConfig("check_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopDecision {
    Continue,
    StopConverged,
    StopStagnated,
}

/// Metrics of the current (last) iterate plus the recent step history.
/// `feas_sq` and `f_value` may be omitted on iterations where they were not evaluated.
#[derive(Debug, Clone, Copy)]
pub struct StopInputs<'a> {
    pub feas_sq: Option<f64>,
    pub f_value: Option<f64>,
    /// Most recent last.
    pub recent_step_norms_sq: &'a [f64],
}

pub fn stopping_check(inputs: &StopInputs<'_>, criteria: &StoppingCriteria) -> StopDecision {
    match criteria.fstar {
        Some(fstar) => match (inputs.feas_sq, inputs.f_value) {
            (Some(feas), Some(f))
                if feas <= criteria.feas_tol && (f - fstar).abs() <= criteria.gap_tol =>
            {
                StopDecision::StopConverged
            }
            _ => StopDecision::Continue,
        },
        None => {
            let steps = inputs.recent_step_norms_sq;
            let m = criteria.window_m;
            if steps.len() >= m
                && steps[steps.len() - m..]
                    .iter()
                    .all(|&s| s <= criteria.stagnation_tol)
            {
                StopDecision::StopStagnated
            } else {
                StopDecision::Continue
            }
        }
    }
}
