//! Linearizations `l(y) = h_j(x) + <g, y - x>` of a constraint at an anchor
//! `x`, the halfspaces `{y : l(y) <= 0}` they induce, and the relaxed
//! projection onto such a halfspace.

use crate::error::{check_dim, Result, ShamError};
use crate::problem::ConstraintOracle;
use crate::Point;

/// Subgradients with `||g|| <= ZERO_SUBGRADIENT_TOL * (1 + ||anchor||)` are
/// treated as zero; the induced set is then all of R^n.
pub const ZERO_SUBGRADIENT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintLinearization {
    pub anchor: Point,
    pub value: f64,
    pub subgradient: Point,
    pub index: usize,
}

impl ConstraintLinearization {
    pub fn new(anchor: Point, value: f64, subgradient: Point, index: usize) -> Result<Self> {
        check_dim(anchor.len(), subgradient.len())?;
        Ok(Self {
            anchor,
            value,
            subgradient,
            index,
        })
    }

    /// `l(y) = value + <subgradient, y - anchor>`.
    pub fn evaluate(&self, y: &Point) -> f64 {
        self.value + self.subgradient.dot(y) - self.subgradient.dot(&self.anchor)
    }

    pub fn is_degenerate(&self) -> bool {
        self.subgradient.norm() <= ZERO_SUBGRADIENT_TOL * (1.0 + self.anchor.norm())
    }

    /// Membership in the induced set: `l(y) <= 0`, or always when degenerate.
    pub fn contains(&self, y: &Point) -> bool {
        self.is_degenerate() || self.evaluate(y) <= 0.0
    }

    /// Euclidean projection onto the induced set.
    pub fn project(&self, v: &Point) -> Point {
        let mut out = v.clone();
        self.relax_in_place(&mut out, 1.0);
        out
    }

    /// `v <- v - beta (l(v))_+ / ||g||^2 g`, or nothing when degenerate.
    /// Returns the positive part `(l(v))_+` that drove the step.
    pub fn relax_in_place(&self, v: &mut Point, beta: f64) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        let excess = self.evaluate(v).max(0.0);
        if excess > 0.0 {
            let scale = beta * excess / self.subgradient.norm_squared();
            v.axpy(-scale, &self.subgradient, 1.0);
        }
        excess
    }
}

/// Queries `h_j` and one subgradient at `anchor`.
pub fn linearize<C: ConstraintOracle + ?Sized>(
    oracle: &C,
    j: usize,
    anchor: &Point,
) -> Result<ConstraintLinearization> {
    if j >= oracle.count() {
        return Err(ShamError::InvalidInput(format!(
            "constraint index {j} out of range (m = {})",
            oracle.count()
        )));
    }
    check_dim(oracle.dimension(), anchor.len())?;
    let (value, subgradient) = oracle.value_and_subgradient(j, anchor);
    Ok(ConstraintLinearization {
        anchor: anchor.clone(),
        value,
        subgradient,
        index: j,
    })
}

/// `l(y)` with a dimension check.
pub fn halfspace_evaluate(lin: &ConstraintLinearization, y: &Point) -> Result<f64> {
    check_dim(lin.anchor.len(), y.len())?;
    Ok(lin.evaluate(y))
}

/// Relaxed projection `v - beta (l(v))_+ / ||g||^2 g` onto the halfspace of
/// `lin`; returns `v` unchanged when the subgradient is (numerically) zero.
pub fn relaxed_halfspace_step(lin: &ConstraintLinearization, v: &Point, beta: f64) -> Result<Point> {
    check_dim(lin.anchor.len(), v.len())?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(ShamError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let finite = lin.value.is_finite()
        && lin.subgradient.iter().all(|x| x.is_finite())
        && lin.anchor.iter().all(|x| x.is_finite())
        && v.iter().all(|x| x.is_finite());
    if !finite {
        return Err(ShamError::InvalidInput(
            "relaxed halfspace step received non-finite input".into(),
        ));
    }
    let mut out = v.clone();
    lin.relax_in_place(&mut out, beta);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Constraint, ConstraintSet};
    use crate::rng;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::from_vec(v.to_vec())
    }

    fn lin(anchor: &[f64], value: f64, g: &[f64]) -> ConstraintLinearization {
        ConstraintLinearization::new(p(anchor), value, p(g), 0).unwrap()
    }

    #[test]
    fn affine_linearization_is_itself() {
        let set = ConstraintSet::new(2, vec![Constraint::affine(p(&[1.0, 0.0]), -1.0)]).unwrap();
        let l = linearize(&set, 0, &p(&[0.0, 0.0])).unwrap();
        assert_eq!(l.value, -1.0);
        assert_eq!(l.subgradient, p(&[1.0, 0.0]));
        assert_eq!(halfspace_evaluate(&l, &p(&[1.0, 5.0])).unwrap(), 0.0);
    }

    #[test]
    fn ball_linearization() {
        let set = ConstraintSet::new(2, vec![Constraint::ball(&p(&[0.0, 0.0]), 1.0)]).unwrap();
        let l = linearize(&set, 0, &p(&[3.0, 4.0])).unwrap();
        assert_eq!(l.value, 4.0);
        assert!((l.subgradient[0] - 0.6).abs() < 1e-15 && (l.subgradient[1] - 0.8).abs() < 1e-15);
        assert!((l.evaluate(&p(&[0.0, 0.0])) + 1.0).abs() < 1e-12);

        let mut r = rng::seeded(21);
        for _ in 0..1000 {
            let y = rng::point_in_box(&mut r, &[-10.0, -10.0], &[10.0, 10.0]);
            assert!(l.evaluate(&y) <= set.value(0, &y) + 1e-10);
        }
    }

    #[test]
    fn linearize_rejects_bad_index() {
        let set = ConstraintSet::new(2, vec![Constraint::affine(p(&[1.0, 0.0]), 0.0)]).unwrap();
        assert!(matches!(
            linearize(&set, 1, &p(&[0.0, 0.0])),
            Err(ShamError::InvalidInput(_))
        ));
    }

    #[test]
    fn zero_subgradient_set_is_everything() {
        let l = lin(&[1.0, 1.0], 5.0, &[0.0, 0.0]);
        assert!(l.contains(&p(&[100.0, -3.0])));
        let v = p(&[2.0, 3.0]);
        assert_eq!(relaxed_halfspace_step(&l, &v, 0.96).unwrap(), v);
    }

    #[test]
    fn step_examples() {
        let l = lin(&[2.0, 0.0], 2.0, &[1.0, 0.0]);
        let v = p(&[3.0, 5.0]);
        assert_eq!(l.evaluate(&v), 3.0);
        assert_eq!(relaxed_halfspace_step(&l, &v, 1.0).unwrap(), p(&[0.0, 5.0]));
        let z = relaxed_halfspace_step(&l, &v, 0.96).unwrap();
        assert!((z[0] - 0.12).abs() < 1e-15 && z[1] == 5.0);

        let inside = p(&[-1.0, 2.0]);
        for beta in [0.5, 1.0, 1.9] {
            assert_eq!(relaxed_halfspace_step(&l, &inside, beta).unwrap(), inside);
        }
    }

    #[test]
    fn step_rejects_non_finite() {
        let l = lin(&[0.0, 0.0], 1.0, &[1.0, 0.0]);
        assert!(relaxed_halfspace_step(&l, &p(&[f64::NAN, 0.0]), 1.0).is_err());
        assert!(relaxed_halfspace_step(&l, &p(&[0.0, 0.0]), 0.0).is_err());
        let bad = lin(&[0.0, 0.0], f64::INFINITY, &[1.0, 0.0]);
        assert!(relaxed_halfspace_step(&bad, &p(&[0.0, 0.0]), 1.0).is_err());
    }

    fn arb_case() -> impl Strategy<Value = (ConstraintLinearization, Point, Point)> {
        (
            prop::collection::vec(-5.0f64..5.0, 3),
            -5.0f64..5.0,
            prop::collection::vec(-3.0f64..3.0, 3),
            prop::collection::vec(-10.0f64..10.0, 3),
            prop::collection::vec(-10.0f64..10.0, 3),
        )
            .prop_filter("nonzero subgradient", |(_, _, g, _, _)| {
                g.iter().map(|x| x * x).sum::<f64>() > 1e-6
            })
            .prop_map(|(a, val, g, v, q)| {
                (lin(&a, val, &g), Point::from_vec(v), Point::from_vec(q))
            })
    }

    proptest! {
        #[test]
        fn step_equals_convex_combination((l, v, _q) in arb_case(), bi in 0usize..6) {
            let beta = [0.1, 0.5, 0.96, 1.0, 1.5, 1.9][bi];
            let z = relaxed_halfspace_step(&l, &v, beta).unwrap();
            let combo = &v * (1.0 - beta) + l.project(&v) * beta;
            prop_assert!((&z - &combo).norm() <= 1e-12 * (1.0 + v.norm()));
        }

        #[test]
        fn fejer_toward_halfspace((l, v, q) in arb_case(), beta in 0.01f64..1.99) {
            // Move q into the halfspace first.
            let q = l.project(&q);
            let z = relaxed_halfspace_step(&l, &v, beta).unwrap();
            prop_assert!((&z - &q).norm() <= (&v - &q).norm() + 1e-10 * (1.0 + v.norm()));
        }

        #[test]
        fn unit_relaxation_lands_on_halfspace((l, v, _q) in arb_case()) {
            let z = relaxed_halfspace_step(&l, &v, 1.0).unwrap();
            prop_assert!(l.evaluate(&z) <= 1e-10 * (1.0 + v.norm()));
        }
    }
}
