use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMode {
    /// `sum_t alpha_t x_{t+1} / sum_t alpha_t`.
    Convex,
    /// `sum_{t > k0} (t+1)^2 x_{t+1} / sum_{t > k0} (t+1)^2`.
    StronglyConvex,
}

/// Iterate, last intermediates and running averages of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Number of completed iterations.
    pub k: usize,
    pub x: Point,
    pub u: Point,
    pub v: Point,
    /// Linearization anchor of the last step.
    pub anchor: Point,
    pub z: Point,
    pub last_alpha: f64,
    pub last_index: Option<usize>,
    pub last_step_norm_sq: f64,
    /// Largest `||grad f(x_k)||` seen so far (empirical `B_f`).
    pub grad_norm_max: f64,
    convex_sum: Point,
    convex_weight: f64,
    sc_sum: Point,
    sc_weight: f64,
    /// First iteration index contributing to the strongly convex average.
    sc_start: Option<usize>,
}

impl SolverState {
    /// `sc_start` is `Some(k0 + 1)` (clamped at 0) for the switching schedule.
    pub fn new(x0: Point, sc_start: Option<usize>) -> Self {
        let n = x0.len();
        Self {
            k: 0,
            u: x0.clone(),
            v: x0.clone(),
            anchor: x0.clone(),
            z: x0.clone(),
            x: x0,
            last_alpha: 0.0,
            last_index: None,
            last_step_norm_sq: 0.0,
            grad_norm_max: 0.0,
            convex_sum: Point::zeros(n),
            convex_weight: 0.0,
            sc_sum: Point::zeros(n),
            sc_weight: 0.0,
            sc_start,
        }
    }

    /// Folds `x_{t+1}` into the averages for iteration `t` with stepsize `alpha`.
    pub fn accumulate(&mut self, t: usize, alpha: f64, next: &Point) {
        self.convex_sum.axpy(alpha, next, 1.0);
        self.convex_weight += alpha;
        if let Some(start) = self.sc_start {
            if t >= start {
                let w = ((t + 1) as f64).powi(2);
                self.sc_sum.axpy(w, next, 1.0);
                self.sc_weight += w;
            }
        }
    }

    /// `S_k = sum_{t<k} alpha_t`.
    pub fn convex_weight(&self) -> f64 {
        self.convex_weight
    }

    pub fn strongly_convex_weight(&self) -> f64 {
        self.sc_weight
    }

    pub fn strongly_convex_active(&self) -> bool {
        self.sc_weight > 0.0
    }

    /// The strongly convex average when the switching schedule has started
    /// accumulating, otherwise the convex average (or `x` before any step).
    pub fn primary_average(&self) -> Point {
        averaged_iterate(self, AverageMode::StronglyConvex)
            .or_else(|_| averaged_iterate(self, AverageMode::Convex))
            .unwrap_or_else(|_| self.x.clone())
    }
}

pub fn averaged_iterate(state: &SolverState, mode: AverageMode) -> Result<Point> {
    let (sum, weight) = match mode {
        AverageMode::Convex => (&state.convex_sum, state.convex_weight),
        AverageMode::StronglyConvex => (&state.sc_sum, state.sc_weight),
    };
    if weight > 0.0 {
        Ok(sum / weight)
    } else {
        Err(ShamError::NotReady(format!(
            "no {mode:?} average accumulated after {} iterations",
            state.k
        )))
    }
}
