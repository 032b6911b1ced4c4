//! Problem data: the objective and constraint oracles, the simple set `Y`,
//! the random SOC-constrained instance generator and the instance file format.

mod constraints;
mod generator;
pub mod io;
mod objective;
mod simple_set;

pub use constraints::{soc_subgradient, soc_value, Constraint, ConstraintSet, SocConstraintData};
pub use generator::{generate_instance, power_iteration, GeneratorMeta, GENERATOR_VERSION};
pub use objective::QuadraticObjective;
pub use simple_set::{project_box, BoxSet};

use crate::error::{check_dim, Result, ShamError};
use crate::Point;

/// Smooth convex objective with known curvature constants.
pub trait ObjectiveOracle: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    /// Lipschitz constant `L_f` of the gradient.
    fn smoothness(&self) -> f64;
    /// Strong convexity modulus `mu` (0 for merely convex objectives).
    fn strong_convexity(&self) -> f64;
}

/// A family of `m` convex functional constraints `h_j(x) <= 0`.
///
/// `value` and `subgradient` panic when `j >= count()`; callers that take
/// untrusted indices validate them first (see [`crate::linearization::linearize`]).
pub trait ConstraintOracle: Send + Sync {
    fn count(&self) -> usize;
    fn dimension(&self) -> usize;
    fn value(&self, j: usize, x: &Point) -> f64;
    fn subgradient(&self, j: usize, x: &Point) -> Point;

    fn value_and_subgradient(&self, j: usize, x: &Point) -> (f64, Point) {
        (self.value(j, x), self.subgradient(j, x))
    }
}

/// Closed convex set with a cheap exact projection.
pub trait SimpleSet: Send + Sync {
    fn dimension(&self) -> usize;
    fn project(&self, p: &Point) -> Point;
    fn contains(&self, p: &Point) -> bool;
}

/// Problem `min f(x)` over `x in Y` subject to `h_j(x) <= 0` for all `j`.
#[derive(Debug, Clone)]
pub struct ProblemInstance<F = QuadraticObjective, C = ConstraintSet, Y = BoxSet> {
    pub objective: F,
    pub constraints: C,
    pub simple_set: Y,
    /// Optimal value when known from a reference oracle. The generator never sets it.
    pub known_fstar: Option<f64>,
    pub meta: Option<GeneratorMeta>,
}

impl<F, C, Y> ProblemInstance<F, C, Y>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    pub fn new(objective: F, constraints: C, simple_set: Y) -> Result<Self> {
        let n = objective.dimension();
        check_dim(n, constraints.dimension())?;
        check_dim(n, simple_set.dimension())?;
        if constraints.count() == 0 {
            return Err(ShamError::InvalidInput(
                "at least one constraint is required".into(),
            ));
        }
        Ok(Self {
            objective,
            constraints,
            simple_set,
            known_fstar: None,
            meta: None,
        })
    }

    pub fn with_fstar(mut self, fstar: f64) -> Self {
        self.known_fstar = Some(fstar);
        self
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.count()
    }

    pub fn constraint_values(&self, x: &Point) -> Vec<f64> {
        (0..self.constraints.count())
            .map(|j| self.constraints.value(j, x))
            .collect()
    }

    /// `max_j (h_j(x))_+`: zero exactly when `x` satisfies every functional constraint.
    pub fn max_violation(&self, x: &Point) -> f64 {
        (0..self.constraints.count())
            .map(|j| self.constraints.value(j, x).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Free-function form of [`ProblemInstance::max_violation`] with a dimension check.
pub fn max_violation<F, C, Y>(instance: &ProblemInstance<F, C, Y>, x: &Point) -> Result<f64>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    check_dim(instance.dimension(), x.len())?;
    Ok(instance.max_violation(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine_instance(constraints: Vec<Constraint>) -> ProblemInstance {
        let n = 2;
        ProblemInstance::new(
            QuadraticObjective::new(crate::Matrix::identity(n, n), Point::zeros(n), 1.0, 1.0)
                .unwrap(),
            ConstraintSet::new(n, constraints).unwrap(),
            BoxSet::uniform(n, -10.0, 10.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn max_violation_single_linear() {
        let inst = affine_instance(vec![Constraint::affine(Point::from_vec(vec![1.0, 0.0]), 0.0)]);
        let x = Point::from_vec(vec![3.0, 0.0]);
        assert_eq!(max_violation(&inst, &x).unwrap(), 3.0);
    }

    #[test]
    fn max_violation_takes_positive_max() {
        let inst = affine_instance(vec![
            Constraint::affine(Point::from_vec(vec![1.0, 0.0]), -1.0),
            Constraint::affine(Point::from_vec(vec![-1.0, 0.0]), -1.0),
        ]);
        let x = Point::from_vec(vec![2.0, 0.0]);
        assert_eq!(inst.max_violation(&x), 1.0);
        assert_eq!(inst.max_violation(&Point::zeros(2)), 0.0);
    }

    #[test]
    fn max_violation_checks_dimension() {
        let inst = affine_instance(vec![Constraint::affine(Point::from_vec(vec![1.0, 0.0]), 0.0)]);
        assert!(matches!(
            max_violation(&inst, &Point::zeros(3)),
            Err(ShamError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_mismatched_oracles() {
        let r = ProblemInstance::new(
            QuadraticObjective::new(crate::Matrix::identity(2, 2), Point::zeros(2), 1.0, 1.0)
                .unwrap(),
            ConstraintSet::new(3, vec![Constraint::affine(Point::zeros(3), -1.0)]).unwrap(),
            BoxSet::uniform(2, -1.0, 1.0).unwrap(),
        );
        assert!(r.is_err());
    }
}
