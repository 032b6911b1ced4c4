use crate::error::{check_dim, Result, ShamError};
use crate::{Matrix, Point};

use super::{power_iteration, ObjectiveOracle};

/// `f(x) = 1/2 x^T Q x + c^T x` with symmetric positive semidefinite `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    pub q_mat: Matrix,
    pub c: Point,
    pub l_f: f64,
    pub mu: f64,
}

impl QuadraticObjective {
    pub fn new(q_mat: Matrix, c: Point, l_f: f64, mu: f64) -> Result<Self> {
        check_dim(q_mat.nrows(), q_mat.ncols())?;
        check_dim(q_mat.nrows(), c.len())?;
        if !(l_f > 0.0 && l_f.is_finite()) {
            return Err(ShamError::InvalidInput(format!("L_f must be positive, got {l_f}")));
        }
        if !(mu >= 0.0 && mu <= l_f) {
            return Err(ShamError::InvalidInput(format!(
                "mu must lie in [0, L_f], got mu={mu}, L_f={l_f}"
            )));
        }
        Ok(Self { q_mat, c, l_f, mu })
    }

    /// Same as [`QuadraticObjective::new`] with `L_f` taken as the top
    /// eigenvalue of `Q` from power iteration.
    pub fn with_power_iteration(q_mat: Matrix, c: Point, mu: f64) -> Result<Self> {
        let l_f = power_iteration(&q_mat, 1e-8, 10_000);
        Self::new(q_mat, c, l_f.max(mu), mu)
    }
}

impl ObjectiveOracle for QuadraticObjective {
    fn dimension(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &Point) -> f64 {
        0.5 * x.dot(&(&self.q_mat * x)) + self.c.dot(x)
    }

    fn gradient(&self, x: &Point) -> Point {
        &self.q_mat * x + &self.c
    }

    fn smoothness(&self) -> f64 {
        self.l_f
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }
}
