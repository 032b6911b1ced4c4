use crate::error::{check_dim, Result, ShamError};
use crate::Point;

use super::SimpleSet;

const CONTAINS_TOL: f64 = 1e-12;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    pub lo: Point,
    pub hi: Point,
}

impl BoxSet {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] <= hi[i])) {
            return Err(ShamError::InvalidInput(format!(
                "box bound lo[{i}] = {} exceeds hi[{i}] = {}",
                lo[i], hi[i]
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(Point::from_element(n, lo), Point::from_element(n, hi))
    }

    pub fn project_in_place(&self, p: &mut Point) {
        for i in 0..p.len() {
            p[i] = p[i].clamp(self.lo[i], self.hi[i]);
        }
    }
}

impl SimpleSet for BoxSet {
    fn dimension(&self) -> usize {
        self.lo.len()
    }

    fn project(&self, p: &Point) -> Point {
        let mut out = p.clone();
        self.project_in_place(&mut out);
        out
    }

    fn contains(&self, p: &Point) -> bool {
        p.len() == self.lo.len()
            && (0..p.len()).all(|i| p[i] >= self.lo[i] - CONTAINS_TOL && p[i] <= self.hi[i] + CONTAINS_TOL)
    }
}

/// Componentwise clamp of `p` onto `[lo, hi]`.
pub fn project_box(lo: &Point, hi: &Point, p: &Point) -> Result<Point> {
    let b = BoxSet::new(lo.clone(), hi.clone())?;
    check_dim(b.dimension(), p.len())?;
    Ok(b.project(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> Point {
        Point::from_vec(v.to_vec())
    }

    #[test]
    fn clamps() {
        let lo = p(&[-1.0, -1.0]);
        let hi = p(&[1.0, 1.0]);
        assert_eq!(project_box(&lo, &hi, &p(&[2.0, 0.5])).unwrap(), p(&[1.0, 0.5]));
        assert_eq!(project_box(&lo, &hi, &p(&[0.3, -0.2])).unwrap(), p(&[0.3, -0.2]));
    }

    #[test]
    fn nonexpansive_against_box_points() {
        let lo = p(&[-1.0, -1.0]);
        let hi = p(&[1.0, 1.0]);
        let x = p(&[-5.0, 7.0]);
        let proj = project_box(&lo, &hi, &x).unwrap();
        assert_eq!(proj, p(&[-1.0, 1.0]));
        let mut r = rng::seeded(1);
        for _ in 0..100 {
            let q = rng::point_in_box(&mut r, &[-1.0, -1.0], &[1.0, 1.0]);
            assert!((&proj - &q).norm() <= (&x - &q).norm());
        }
    }

    #[test]
    fn rejects_inverted_bounds() {
        assert!(matches!(
            project_box(&p(&[1.0]), &p(&[0.0]), &p(&[0.5])),
            Err(ShamError::InvalidInput(_))
        ));
    }

    proptest! {
        #[test]
        fn idempotent_and_nonexpansive(
            x in prop::collection::vec(-50.0f64..50.0, 3),
            q in prop::collection::vec(-2.0f64..2.0, 3),
        ) {
            let b = BoxSet::uniform(3, -2.0, 2.0).unwrap();
            let x = Point::from_vec(x);
            let q = Point::from_vec(q);
            let once = b.project(&x);
            prop_assert_eq!(b.project(&once), once.clone());
            prop_assert!(b.contains(&once));
            prop_assert!((&once - &q).norm() <= (&x - &q).norm() + 1e-12);
        }
    }
}
