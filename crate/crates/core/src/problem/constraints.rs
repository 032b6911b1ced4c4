use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{check_dim, Result, ShamError};
use crate::{Matrix, Point};

use super::ConstraintOracle;

/// Second-order cone constraint `||Q x + a|| <= q^T x + b`, stored as
/// `h(x) = ||Q x + a|| - q^T x - b <= 0`.
///
/// `Q` may have zero rows, in which case the constraint is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraintData {
    pub q_mat: Matrix,
    pub a: Point,
    pub q: Point,
    pub b: f64,
}

impl SocConstraintData {
    pub fn new(q_mat: Matrix, a: Point, q: Point, b: f64) -> Result<Self> {
        check_dim(q_mat.nrows(), a.len())?;
        check_dim(q_mat.ncols(), q.len())?;
        if !b.is_finite() {
            return Err(ShamError::InvalidInput("SOC offset b must be finite".into()));
        }
        Ok(Self { q_mat, a, q, b })
    }

    /// Unit ball `||x - center|| <= radius`.
    pub fn ball(center: &Point, radius: f64) -> Self {
        let n = center.len();
        Self {
            q_mat: Matrix::identity(n, n),
            a: -center,
            q: Point::zeros(n),
            b: radius,
        }
    }

    pub fn dimension(&self) -> usize {
        self.q.len()
    }

    pub fn cone_rows(&self) -> usize {
        self.q_mat.nrows()
    }

    /// `||a|| < b`, i.e. the origin is strictly feasible.
    pub fn origin_strictly_feasible(&self) -> bool {
        self.a.norm() < self.b
    }

    fn residual(&self, x: &Point) -> Point {
        &self.q_mat * x + &self.a
    }

    pub(crate) fn value_unchecked(&self, x: &Point) -> f64 {
        self.residual(x).norm() - self.q.dot(x) - self.b
    }

    pub(crate) fn value_and_subgradient_unchecked(&self, x: &Point) -> (f64, Point) {
        let r = self.residual(x);
        let nr = r.norm();
        let value = nr - self.q.dot(x) - self.b;
        // At r = 0 the zero element of the norm's subdifferential is selected.
        let g = if nr > 0.0 {
            let mut g = self.q_mat.tr_mul(&r);
            g /= nr;
            g -= &self.q;
            g
        } else {
            -&self.q
        };
        (value, g)
    }
}

/// `h(x) = ||Q x + a|| - q^T x - b`.
pub fn soc_value(data: &SocConstraintData, x: &Point) -> Result<f64> {
    check_dim(data.dimension(), x.len())?;
    Ok(data.value_unchecked(x))
}

/// A subgradient of [`soc_value`]: `Q^T (Qx+a)/||Qx+a|| - q`, or `-q` when `Qx + a = 0`.
pub fn soc_subgradient(data: &SocConstraintData, x: &Point) -> Result<Point> {
    check_dim(data.dimension(), x.len())?;
    Ok(data.value_and_subgradient_unchecked(x).1)
}

/// One functional constraint `h(x) <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    Soc(SocConstraintData),
    /// `h(x) = a^T x + b`.
    Affine { a: Point, b: f64 },
    /// `h(x) = max_i max(x_i - hi_i, lo_i - x_i)`, nonpositive exactly on the box.
    Box { lo: Point, hi: Point },
}

impl Constraint {
    pub fn affine(a: Point, b: f64) -> Self {
        Constraint::Affine { a, b }
    }

    pub fn ball(center: &Point, radius: f64) -> Self {
        Constraint::Soc(SocConstraintData::ball(center, radius))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Constraint::Soc(d) => d.dimension(),
            Constraint::Affine { a, .. } => a.len(),
            Constraint::Box { lo, .. } => lo.len(),
        }
    }

    pub fn value(&self, x: &Point) -> f64 {
        match self {
            Constraint::Soc(d) => d.value_unchecked(x),
            Constraint::Affine { a, b } => a.dot(x) + b,
            Constraint::Box { lo, hi } => box_argmax(lo, hi, x).1,
        }
    }

    pub fn value_and_subgradient(&self, x: &Point) -> (f64, Point) {
        match self {
            Constraint::Soc(d) => d.value_and_subgradient_unchecked(x),
            Constraint::Affine { a, b } => (a.dot(x) + b, a.clone()),
            Constraint::Box { lo, hi } => {
                let ((i, upper), v) = box_argmax(lo, hi, x);
                let mut g = Point::zeros(x.len());
                g[i] = if upper { 1.0 } else { -1.0 };
                (v, g)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Constraint::Soc(d) => {
                check_dim(d.q_mat.nrows(), d.a.len())?;
                check_dim(d.q_mat.ncols(), d.q.len())
            }
            Constraint::Affine { b, .. } if !b.is_finite() => {
                Err(ShamError::InvalidInput("affine offset must be finite".into()))
            }
            Constraint::Affine { .. } => Ok(()),
            Constraint::Box { lo, hi } => {
                check_dim(lo.len(), hi.len())?;
                if lo.is_empty() || lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                    return Err(ShamError::InvalidInput("box constraint needs lo <= hi".into()));
                }
                Ok(())
            }
        }
    }
}

/// Returns `((index, is_upper_face), value)` of the most violated box face.
/// Ties go to the lowest index, upper face first.
fn box_argmax(lo: &Point, hi: &Point, x: &Point) -> ((usize, bool), f64) {
    let mut best = ((0, true), f64::NEG_INFINITY);
    for i in 0..x.len() {
        let up = x[i] - hi[i];
        if up > best.1 {
            best = ((i, true), up);
        }
        let down = lo[i] - x[i];
        if down > best.1 {
            best = ((i, false), down);
        }
    }
    best
}

/// A finite list of constraints sharing one dimension.
///
/// Records the largest subgradient norm it has returned as an empirical
/// bound `B_h`; the record is an atomic so concurrent evaluation stays safe.
#[derive(Debug)]
pub struct ConstraintSet {
    dimension: usize,
    constraints: Vec<Constraint>,
    max_subgradient_norm: AtomicU64,
}

impl Clone for ConstraintSet {
    fn clone(&self) -> Self {
        Self {
            dimension: self.dimension,
            constraints: self.constraints.clone(),
            max_subgradient_norm: AtomicU64::new(self.max_subgradient_norm.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for ConstraintSet {
    fn eq(&self, other: &Self) -> bool {
        self.dimension == other.dimension && self.constraints == other.constraints
    }
}

impl ConstraintSet {
    pub fn new(dimension: usize, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            c.validate()?;
            check_dim(dimension, c.dimension())?;
        }
        Ok(Self {
            dimension,
            constraints,
            max_subgradient_norm: AtomicU64::new(0f64.to_bits()),
        })
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn get(&self, j: usize) -> Option<&Constraint> {
        self.constraints.get(j)
    }

    /// Largest subgradient norm returned so far.
    pub fn observed_subgradient_bound(&self) -> f64 {
        f64::from_bits(self.max_subgradient_norm.load(Ordering::Relaxed))
    }

    fn observe(&self, g: &Point) {
        let norm = g.norm();
        if norm.is_finite() {
            // Bit patterns of non-negative floats are ordered like the floats.
            self.max_subgradient_norm
                .fetch_max(norm.to_bits(), Ordering::Relaxed);
        }
    }
}

impl ConstraintOracle for ConstraintSet {
    fn count(&self) -> usize {
        self.constraints.len()
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, j: usize, x: &Point) -> f64 {
        self.constraints[j].value(x)
    }

    fn subgradient(&self, j: usize, x: &Point) -> Point {
        self.value_and_subgradient(j, x).1
    }

    fn value_and_subgradient(&self, j: usize, x: &Point) -> (f64, Point) {
        let (v, g) = self.constraints[j].value_and_subgradient(x);
        self.observe(&g);
        (v, g)
    }
}
