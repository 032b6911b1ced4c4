use crate::error::{Result, ShamError};
use crate::rng::{self, SeededRng};
use crate::{Matrix, Point};

use super::{
    BoxSet, Constraint, ConstraintSet, ProblemInstance, QuadraticObjective, SocConstraintData,
};

pub const GENERATOR_VERSION: &str = "sham-gen/1";

/// Bounds of the simple set `Y = [-BOX_RADIUS, BOX_RADIUS]^n`.
pub const BOX_RADIUS: f64 = 1e3;

/// Provenance of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMeta {
    pub seed: u64,
    pub mu: f64,
    /// Factor applied to `A^T A` when forming `Q_f` (`1/n`).
    pub objective_scale: f64,
    pub version: String,
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
///
/// Starts from the normalized all-ones vector and stops once the Rayleigh
/// quotient changes by at most `rel_tol` relative, or after `max_iter` products.
pub fn power_iteration(q: &Matrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = Point::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = v.dot(&(q * &v));
    for _ in 0..max_iter {
        let w = q * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let next = v.dot(&(q * &v));
        let done = (next - lambda).abs() <= rel_tol * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

fn normal_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> Matrix {
    // Row-major draw order.
    let data: Vec<f64> = (0..rows * cols).map(|_| rng::standard_normal(rng)).collect();
    Matrix::from_row_slice(rows, cols, &data)
}

fn normal_vector(rng: &mut SeededRng, len: usize) -> Point {
    Point::from_iterator(len, (0..len).map(|_| rng::standard_normal(rng)))
}

/// Random quadratic objective with second-order cone constraints.
///
/// Draw order from the seeded stream: `A` (n x n, row-major), `q_f`, then for
/// each constraint `n_i`, `Q_i` (row-major), `a_i`, `q_i`, `b_i`.
///
/// - `Q_f = A^T A / n + mu I`, `q_f` standard normal;
/// - `n_i` uniform in `[1, n-1]`, `Q_i` and `q_i` standard normal;
/// - `b_i` uniform in `[1, 2)` and `a_i` a standard normal direction scaled to
///   `||a_i|| = b_i / 2`, so the origin is strictly feasible with margin `b_i / 2`;
/// - `Y = [-1000, 1000]^n`, `L_f` from [`power_iteration`] at tolerance `1e-8`.
pub fn generate_instance(n: usize, m: usize, mu: f64, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(ShamError::InvalidInput(format!("dimension n must be >= 2, got {n}")));
    }
    if m < 1 {
        return Err(ShamError::InvalidInput("constraint count m must be >= 1".into()));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(ShamError::InvalidInput(format!("mu must be finite and >= 0, got {mu}")));
    }

    let mut rng = rng::seeded(seed);
    let scale = 1.0 / n as f64;
    let a = normal_matrix(&mut rng, n, n);
    let mut q_f = a.tr_mul(&a) * scale;
    for i in 0..n {
        q_f[(i, i)] += mu;
    }
    let q_lin = normal_vector(&mut rng, n);

    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let rows = 1 + rng::index(&mut rng, n - 1);
        let q_mat = normal_matrix(&mut rng, rows, n);
        let mut a_i = normal_vector(&mut rng, rows);
        let q_i = normal_vector(&mut rng, n);
        let b_i = rng::uniform(&mut rng, 1.0, 2.0);
        let norm = a_i.norm();
        if norm > 0.0 {
            a_i *= 0.5 * b_i / norm;
        }
        constraints.push(Constraint::Soc(SocConstraintData::new(q_mat, a_i, q_i, b_i)?));
    }

    let objective = QuadraticObjective::with_power_iteration(q_f, q_lin, mu)?;
    let mut instance = ProblemInstance::new(
        objective,
        ConstraintSet::new(n, constraints)?,
        BoxSet::uniform(n, -BOX_RADIUS, BOX_RADIUS)?,
    )?;
    instance.meta = Some(GeneratorMeta {
        seed,
        mu,
        objective_scale: scale,
        version: GENERATOR_VERSION.to_string(),
    });
    Ok(instance)
}
