//! Reference machinery used to check the solver: a brute-force grid
//! minimizer for n <= 3, a deterministic all-constraints baseline solver,
//! distance-to-feasible estimation and empirical regularity/subgradient
//! constants.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, ShamError};
use crate::par;
use crate::problem::{BoxSet, ConstraintOracle, ObjectiveOracle, ProblemInstance, SimpleSet};
use crate::rng;
use crate::Point;

/// Feasibility level guaranteed for the baseline's returned point.
pub const BASELINE_FEAS_TOL: f64 = 1e-6;
/// Sweep cap for [`distance_to_feasible`].
pub const MAX_FEASIBILITY_SWEEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Grid,
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub fstar_estimate: f64,
    pub xstar_estimate: Point,
    pub method: OracleMethod,
    pub certified_tolerance: f64,
}

struct GridBest {
    f: f64,
    x: Option<Point>,
    grad_max: f64,
    subgrad_max: f64,
}

/// Exhaustive search over a regular grid of `bounds` with `points_per_axis`
/// nodes per coordinate (endpoints included). Only nodes with every
/// `h_j <= 0` exactly and inside `Y` are kept.
///
/// The certified tolerance is `G spacing sqrt(n) + B_h spacing`, where `G`
/// and `B_h` are the largest objective gradient and constraint subgradient
/// norms over the grid nodes.
pub fn brute_force_min_grid<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    bounds: &BoxSet,
    points_per_axis: usize,
) -> Result<OracleReport>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    let n = instance.dimension();
    if n > 3 {
        return Err(ShamError::UnsupportedDimension(n));
    }
    check_dim(n, bounds.lo.len())?;
    if points_per_axis < 2 {
        return Err(ShamError::InvalidInput("points_per_axis must be >= 2".into()));
    }
    let steps = (points_per_axis - 1) as f64;
    let coord = |axis: usize, i: usize| {
        let (lo, hi) = (bounds.lo[axis], bounds.hi[axis]);
        if i + 1 == points_per_axis {
            hi
        } else {
            lo + (hi - lo) * i as f64 / steps
        }
    };
    let inner = points_per_axis.pow(n as u32 - 1);

    // One slab per index of the first axis; slabs are scanned in order.
    let slabs = par::map_range(points_per_axis, |i0| {
        let mut best = GridBest { f: f64::INFINITY, x: None, grad_max: 0.0, subgrad_max: 0.0 };
        let mut x = Point::zeros(n);
        for rest in 0..inner {
            x[0] = coord(0, i0);
            let mut r = rest;
            for axis in 1..n {
                x[axis] = coord(axis, r % points_per_axis);
                r /= points_per_axis;
            }
            best.grad_max = best.grad_max.max(instance.objective.gradient(&x).norm());
            let mut feasible = instance.simple_set.contains(&x);
            for j in 0..instance.constraints.count() {
                let (h, g) = instance.constraints.value_and_subgradient(j, &x);
                best.subgrad_max = best.subgrad_max.max(g.norm());
                feasible &= h <= 0.0;
            }
            if feasible {
                let f = instance.objective.value(&x);
                if f < best.f {
                    best.f = f;
                    best.x = Some(x.clone());
                }
            }
        }
        best
    });

    let mut grad_max: f64 = 0.0;
    let mut subgrad_max: f64 = 0.0;
    let mut winner: Option<(f64, Point)> = None;
    for s in slabs {
        grad_max = grad_max.max(s.grad_max);
        subgrad_max = subgrad_max.max(s.subgrad_max);
        if let Some(x) = s.x {
            if winner.as_ref().map_or(true, |(f, _)| s.f < *f) {
                winner = Some((s.f, x));
            }
        }
    }
    let (f, x) = winner.ok_or(ShamError::InfeasibleGrid)?;
    let spacing = (0..n)
        .map(|i| (bounds.hi[i] - bounds.lo[i]) / steps)
        .fold(0.0, f64::max);
    Ok(OracleReport {
        fstar_estimate: f,
        xstar_estimate: x,
        method: OracleMethod::Grid,
        certified_tolerance: grad_max * spacing * (n as f64).sqrt() + subgrad_max * spacing,
    })
}

/// One cyclic pass of exact halfspace projections over every violated
/// constraint, followed by the projection onto `Y`.
fn feasibility_sweep<F, C, Y>(instance: &ProblemInstance<F, C, Y>, y: &mut Point)
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    for j in 0..instance.constraints.count() {
        let (h, g) = instance.constraints.value_and_subgradient(j, y);
        if h > 0.0 {
            let gg = g.norm_squared();
            if gg > 0.0 {
                y.axpy(-h / gg, &g, 1.0);
            }
        }
    }
    *y = instance.simple_set.project(y);
}

/// Up to 10^4 sweeps from `x` until the max violation is within the baseline
/// tolerance; `None` if that never happens.
fn restore_feasibility<F, C, Y>(instance: &ProblemInstance<F, C, Y>, x: &Point) -> Option<Point>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    let mut y = x.clone();
    for _ in 0..10_000 {
        if instance.max_violation(&y) <= BASELINE_FEAS_TOL {
            return Some(y);
        }
        feasibility_sweep(instance, &mut y);
    }
    (instance.max_violation(&y) <= BASELINE_FEAS_TOL).then_some(y)
}

/// Deterministic full-information reference solver.
///
/// Each iteration takes a projected gradient step with
/// `min(1/L_f, 2/(mu(k+1)))` when `mu > 0` or `(1/L_f)/sqrt(k)` otherwise,
/// then one [`feasibility_sweep`] over all constraints. Returns the lowest
/// objective among iterates with max violation `<= 1e-6`, together with
/// sweep-restored copies of the iterates at powers of two and the last one.
pub fn baseline_solver<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    iterations: usize,
) -> Result<OracleReport>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    if iterations < 10_000 {
        return Err(ShamError::InvalidInput(format!(
            "baseline needs at least 10^4 iterations, got {iterations}"
        )));
    }
    let l_f = instance.objective.smoothness();
    let mu = instance.objective.strong_convexity();
    let alpha = |k: usize| {
        if mu > 0.0 {
            (1.0 / l_f).min(2.0 / (mu * (k as f64 + 1.0)))
        } else if k == 0 {
            1.0 / l_f
        } else {
            1.0 / (l_f * (k as f64).sqrt())
        }
    };

    let n = instance.dimension();
    let mut x = instance.simple_set.project(&Point::zeros(n));
    let mut best: Option<(f64, Point)> = None;
    for k in 0..iterations {
        let g = instance.objective.gradient(&x);
        x.axpy(-alpha(k), &g, 1.0);
        x = instance.simple_set.project(&x);
        feasibility_sweep(instance, &mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ShamError::NumericalFailure { k, quantity: "baseline iterate".into() });
        }
        // Curved constraints leave late iterates slightly above the tolerance,
        // so restored copies at k = 2^i and at the end also compete.
        let last = k + 1 == iterations;
        let candidate = if instance.max_violation(&x) <= BASELINE_FEAS_TOL {
            Some(x.clone())
        } else if last || (k >= 1024 && k.is_power_of_two()) {
            restore_feasibility(instance, &x)
        } else {
            None
        };
        if let Some(y) = candidate {
            let f = instance.objective.value(&y);
            if best.as_ref().map_or(true, |(fb, _)| f < *fb) {
                best = Some((f, y));
            }
        }
    }
    let (f, x) = best.ok_or_else(|| {
        ShamError::OracleFailure("baseline could not reach the feasibility tolerance".into())
    })?;
    Ok(OracleReport {
        fstar_estimate: f,
        xstar_estimate: x,
        method: OracleMethod::Baseline,
        certified_tolerance: BASELINE_FEAS_TOL,
    })
}

/// A point of `X = Y ∩ {h_j <= 0}` reached from `x` by repeated feasibility
/// sweeps, stopping once the max violation is `<= precision * 1e-2`.
pub fn feasible_point_near<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    x: &Point,
    precision: f64,
) -> Result<Point>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    check_dim(instance.dimension(), x.len())?;
    if !(precision > 0.0) {
        return Err(ShamError::InvalidInput(format!("precision must be > 0, got {precision}")));
    }
    let target = precision * 1e-2;
    let mut y = instance.simple_set.project(x);
    for _ in 0..MAX_FEASIBILITY_SWEEPS {
        if instance.max_violation(&y) <= target {
            return Ok(y);
        }
        feasibility_sweep(instance, &mut y);
    }
    if instance.max_violation(&y) <= target {
        return Ok(y);
    }
    Err(ShamError::OracleFailure(format!(
        "no feasible point within {MAX_FEASIBILITY_SWEEPS} sweeps"
    )))
}

/// `||x - y||` for the `y` of [`feasible_point_near`]: an upper bound on
/// `dist(x, X)`, exact for a single halfspace or ball.
pub fn distance_to_feasible<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    x: &Point,
    precision: f64,
) -> Result<f64>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    let y = feasible_point_near(instance, x, precision)?;
    Ok((x - y).norm())
}

fn sample_points(bounds: &BoxSet, samples: usize, seed: u64) -> Vec<Point> {
    let mut r = rng::seeded(seed);
    let lo: Vec<f64> = bounds.lo.iter().copied().collect();
    let hi: Vec<f64> = bounds.hi.iter().copied().collect();
    (0..samples).map(|_| rng::point_in_box(&mut r, &lo, &hi)).collect()
}

/// Largest observed `dist(x, X) / max_j (h_j(x))_+` over infeasible points
/// drawn uniformly from `bounds`: a lower estimate of the regularity constant.
/// Sample `i` is the same for every `samples >= i`, so the estimate is
/// nondecreasing in `samples`.
pub fn estimate_regularity_constant<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    bounds: &BoxSet,
    samples: usize,
    seed: u64,
) -> Result<f64>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    if samples < 100 {
        return Err(ShamError::InvalidInput("need at least 100 samples".into()));
    }
    let points: Vec<(Point, f64)> = sample_points(bounds, samples, seed)
        .into_iter()
        .map(|x| {
            let v = instance.max_violation(&x);
            (x, v)
        })
        .filter(|(_, v)| *v > 0.0)
        .collect();
    if points.is_empty() {
        return Err(ShamError::DegenerateSample("every sampled point is feasible".into()));
    }
    let ratios = par::map(&points, |(x, v)| {
        distance_to_feasible(instance, x, 1e-6).map(|d| d / v)
    });
    ratios
        .into_iter()
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
}

/// Largest `||g_j(x)||` over all constraints at points drawn uniformly from `bounds`.
pub fn estimate_subgradient_bound<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    bounds: &BoxSet,
    samples: usize,
    seed: u64,
) -> Result<f64>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    if samples < 100 {
        return Err(ShamError::InvalidInput("need at least 100 samples".into()));
    }
    let points = sample_points(bounds, samples, seed);
    let norms = par::map(&points, |x| {
        (0..instance.constraints.count())
            .map(|j| instance.constraints.subgradient(j, x).norm())
            .fold(0.0, f64::max)
    });
    Ok(norms.into_iter().fold(0.0, f64::max))
}
