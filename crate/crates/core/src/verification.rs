//! Self-checks that exercise the solver against independent closed forms.
//!
//! Each suite returns a [`CheckReport`]; [`quick_suites`] bundles the fast
//! ones for the CLI `verify` command. The halfspace suite takes the step
//! function as a parameter so a deliberately broken step can be fed through
//! it to confirm the suite notices.

use std::fmt;

use rand::Rng;

use crate::error::Result;
use crate::experiments::{
    rate_fit, stopping_check, RateQuantity, RunRecord, StopDecision, StopInputs, StoppingCriteria,
    DEFAULT_BURN_IN,
};
use crate::linearization::{relaxed_halfspace_step, ConstraintLinearization};
use crate::problem::{
    generate_instance, BoxSet, Constraint, ConstraintOracle, ConstraintSet, ProblemInstance,
    QuadraticObjective, SocConstraintData,
};
use crate::rng;
use crate::solver::{initial_state, sham_step, switching_index, Sampler, SolverConfig, StepsizeSchedule};
use crate::{Matrix, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, failures: usize, total: usize, worst: f64) -> Self {
        Self {
            name: name.into(),
            passed: failures == 0,
            detail: format!("{failures} failures / {total} cases, worst {worst:.3e}"),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Signature of the relaxed halfspace step under test.
pub type StepFn = fn(&ConstraintLinearization, &Point, f64) -> Result<Point>;

fn random_point(r: &mut rng::SeededRng, n: usize, scale: f64) -> Point {
    Point::from_fn(n, |_, _| scale * rng::standard_normal(r))
}

/// Compares `step` with `(1 - beta) v + beta P(v)` where `P` is the closed-form
/// projection onto the linearized halfspace; also checks `beta = 1` lands on
/// `P(v)` and a zero subgradient leaves `v` untouched. Tolerance `1e-12`
/// relative to the size of the inputs.
pub fn halfspace_identity_suite(cases: usize, seed: u64, step: StepFn) -> CheckReport {
    let mut r = rng::seeded(seed);
    let mut failures = 0;
    let mut worst = 0.0f64;
    for case in 0..cases {
        let n = r.gen_range(1..=6);
        let anchor = random_point(&mut r, n, 3.0);
        let v = random_point(&mut r, n, 3.0);
        let value = 2.0 * rng::standard_normal(&mut r);
        let g = if case % 50 == 0 { Point::zeros(n) } else { random_point(&mut r, n, 1.0) };
        let beta = match case % 4 {
            0 => 1.0,
            _ => rng::uniform(&mut r, 1e-3, 2.0 - 1e-3),
        };
        let lin = ConstraintLinearization { anchor, value, subgradient: g.clone(), index: 0 };

        let expected = if g.norm_squared() == 0.0 {
            v.clone()
        } else {
            let level = lin.value + g.dot(&(&v - &lin.anchor));
            let proj = &v - &g * (level.max(0.0) / g.norm_squared());
            &v * (1.0 - beta) + proj * beta
        };
        let got = match step(&lin, &v, beta) {
            Ok(p) => p,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let scale = 1.0 + v.norm() + expected.norm();
        let err = (&got - &expected).norm() / scale;
        worst = worst.max(err);
        let exact_needed = g.norm_squared() == 0.0;
        if err > 1e-12 || (exact_needed && got != v) {
            failures += 1;
        }
    }
    CheckReport::new("halfspace identities", failures, cases, worst)
}

/// Built-in constraint families used by the subgradient suite.
fn family_instances() -> Vec<(&'static str, ConstraintSet)> {
    let mut out = Vec::new();
    let generated = generate_instance(5, 8, 0.0, 3).expect("generator");
    out.push(("soc", generated.constraints));
    let zero_rows = SocConstraintData::new(
        Matrix::zeros(0, 3),
        Point::zeros(0),
        Point::from_vec(vec![1.0, -2.0, 0.5]),
        1.0,
    )
    .expect("soc");
    out.push((
        "affine",
        ConstraintSet::new(
            3,
            vec![
                Constraint::affine(Point::from_vec(vec![1.0, 2.0, -1.0]), 0.5),
                Constraint::Soc(zero_rows),
            ],
        )
        .expect("set"),
    ));
    out.push((
        "ball",
        ConstraintSet::new(3, vec![Constraint::ball(&Point::from_vec(vec![1.0, 0.0, -1.0]), 2.0)])
            .expect("set"),
    ));
    out.push((
        "box",
        ConstraintSet::new(
            3,
            vec![Constraint::Box {
                lo: Point::from_vec(vec![-1.0, -2.0, 0.0]),
                hi: Point::from_vec(vec![1.0, 0.5, 3.0]),
            }],
        )
        .expect("set"),
    ));
    out
}

/// `h_j(y) >= h_j(x) + <g, y - x>` on random triples for every built-in family,
/// with tolerance `1e-10` relative to the magnitudes involved.
pub fn subgradient_suite(triples: usize, seed: u64) -> CheckReport {
    let mut r = rng::seeded(seed);
    let mut failures = 0;
    let mut worst = 0.0f64;
    let mut total = 0;
    for (_, set) in family_instances() {
        let n = set.dimension();
        for _ in 0..triples {
            let j = rng::index(&mut r, set.count());
            let x = random_point(&mut r, n, 5.0);
            let y = random_point(&mut r, n, 5.0);
            let (hx, g) = set.value_and_subgradient(j, &x);
            let hy = set.value(j, &y);
            let lower = hx + g.dot(&(&y - &x));
            let scale = 1.0 + hx.abs() + hy.abs() + g.norm() * (&y - &x).norm();
            let excess = (lower - hy) / scale;
            worst = worst.max(excess);
            if excess > 1e-10 {
                failures += 1;
            }
            total += 1;
        }
    }
    CheckReport::new("subgradient inequality", failures, total, worst)
}

/// Exact switching-schedule values: `1/L_f` up to `k0`, `2/(mu(k+1))` after,
/// plus the tabulated switching indices.
pub fn switching_schedule_suite() -> CheckReport {
    let mut failures = 0;
    let mut total = 0;
    for (l_f, mu, k0) in [(10.0, 1.0, 19), (1.0, 1.0, 1)] {
        total += 1;
        if switching_index(l_f, mu).ok() != Some(k0) {
            failures += 1;
        }
    }
    for (l_f, mu) in [(10.0, 1.0), (4.5, 1.0), (1.0, 1.0), (0.4, 1.0), (123.4, 0.3)] {
        let sched = StepsizeSchedule::StronglyConvexSwitching { l_f, mu };
        let k0 = switching_index(l_f, mu).expect("mu > 0");
        for k in 0..2000usize {
            let want = if (k as i64) <= k0 { 1.0 / l_f } else { 2.0 / (mu * (k as f64 + 1.0)) };
            total += 1;
            if sched.stepsize(k) != want {
                failures += 1;
            }
        }
    }
    CheckReport::new("switching schedule", failures, total, 0.0)
}

fn record(k: usize, feas: f64, f: f64, step: f64) -> RunRecord {
    RunRecord { k, f_last: f, feas_sq_last: feas, step_norm_sq: step, ..RunRecord::default() }
}

/// Feeds synthetic record streams through the stopping rule and checks the
/// decision and the iteration at which it fires.
pub fn stopping_suite() -> CheckReport {
    let window = 10;
    let replay = |stream: &[RunRecord], criteria: &StoppingCriteria| -> (StopDecision, usize) {
        let mut steps: Vec<f64> = Vec::new();
        for r in stream {
            steps.push(r.step_norm_sq);
            let tail = &steps[steps.len().saturating_sub(criteria.window_m)..];
            let d = stopping_check(
                &StopInputs {
                    feas_sq: Some(r.feas_sq_last),
                    f_value: Some(r.f_last),
                    recent_step_norms_sq: tail,
                },
                criteria,
            );
            if d != StopDecision::Continue {
                return (d, r.k);
            }
        }
        (StopDecision::Continue, stream.last().map_or(0, |r| r.k))
    };
    let known = StoppingCriteria { fstar: Some(0.0), ..StoppingCriteria::default() };
    let unknown = StoppingCriteria::default();

    // Gap and feasibility shrink geometrically and hit 1e-2 exactly at k = 5.
    let mut conv: Vec<RunRecord> =
        (1..5).map(|k| record(k, 0.08 / k as f64, 0.08 / k as f64, 1.0)).collect();
    conv.push(record(5, 1e-2, 1e-2, 1.0));
    conv.push(record(6, 1e-3, 1e-3, 1.0));

    // Steps fall to exactly 1e-3 from k = 3 on; the window fills at k = 12.
    let stag: Vec<RunRecord> = (1..=20)
        .map(|k| record(k, 1.0, 5.0, if k < 3 { 0.5 } else { 1e-3 }))
        .collect();

    // One step just above the threshold inside the window delays stagnation.
    let mut late = stag.clone();
    late[9].step_norm_sq = 1.0000001e-3;

    let cases: Vec<(StopDecision, usize, (StopDecision, usize))> = vec![
        (StopDecision::StopConverged, 5, replay(&conv, &known)),
        (StopDecision::StopStagnated, 2 + window, replay(&stag, &unknown)),
        (StopDecision::StopStagnated, 10 + window, replay(&late, &unknown)),
        // Stagnation is not consulted once f* is known.
        (StopDecision::Continue, 20, replay(&stag, &known)),
        // Infeasible stream never converges, whatever the gap.
        (
            StopDecision::Continue,
            20,
            replay(&(1..=20).map(|k| record(k, 0.05, 0.0, 1.0)).collect::<Vec<_>>(), &known),
        ),
    ];
    let total = cases.len();
    let failures = cases.iter().filter(|(d, k, got)| (*d, *k) != *got).count();
    CheckReport::new("stopping rule", failures, total, 0.0)
}

/// A test instance together with an exact `dist(., X)`.
struct ExactCase {
    name: &'static str,
    instance: ProblemInstance,
    dist: fn(&Point) -> f64,
}

fn quadratic_towards(target: &[f64]) -> QuadraticObjective {
    let n = target.len();
    QuadraticObjective::new(
        Matrix::identity(n, n),
        -Point::from_column_slice(target),
        1.0,
        1.0,
    )
    .expect("objective")
}

fn exact_instance(target: &[f64], constraints: Vec<Constraint>) -> ProblemInstance {
    ProblemInstance::new(
        quadratic_towards(target),
        ConstraintSet::new(2, constraints).expect("set"),
        BoxSet::uniform(2, -1e3, 1e3).expect("box"),
    )
    .expect("instance")
}

// Halfspaces x1 + x2 <= 1 and x1 - 2 x2 <= 1, meeting at (1, 0).
const A1: [f64; 2] = [1.0, 1.0];
const A2: [f64; 2] = [1.0, -2.0];

fn dist_two_halfspaces(x: &Point) -> f64 {
    let s1 = A1[0] * x[0] + A1[1] * x[1] - 1.0;
    let s2 = A2[0] * x[0] + A2[1] * x[1] - 1.0;
    if s1 <= 0.0 && s2 <= 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    // The projection lies on a violated face (if feasible there) or at the vertex.
    for (a, s, other) in [(A1, s1, A2), (A2, s2, A1)] {
        if s > 0.0 {
            let nn = a[0] * a[0] + a[1] * a[1];
            let p = [x[0] - s / nn * a[0], x[1] - s / nn * a[1]];
            if other[0] * p[0] + other[1] * p[1] - 1.0 <= 1e-15 {
                best = best.min(s / nn.sqrt());
            }
        }
    }
    let vertex = ((x[0] - 1.0).powi(2) + x[1].powi(2)).sqrt();
    best.min(vertex)
}

fn exact_cases() -> Vec<ExactCase> {
    vec![
        ExactCase {
            name: "halfspace",
            instance: exact_instance(&[3.0, 1.0], vec![Constraint::affine(Point::from_vec(vec![1.0, 0.0]), 0.0)]),
            dist: |x| x[0].max(0.0),
        },
        ExactCase {
            name: "ball",
            instance: exact_instance(&[2.0, 2.0], vec![Constraint::ball(&Point::zeros(2), 1.0)]),
            dist: |x| (x.norm() - 1.0).max(0.0),
        },
        ExactCase {
            name: "two halfspaces",
            instance: exact_instance(
                &[3.0, 0.5],
                vec![
                    Constraint::affine(Point::from_column_slice(&A1), -1.0),
                    Constraint::affine(Point::from_column_slice(&A2), -1.0),
                ],
            ),
            dist: dist_two_halfspaces,
        },
    ]
}

/// Runs `iterations` steps from a seeded start and reports the largest
/// `dist(x_{k+1}) - dist(v_k)` seen.
fn max_distance_increase(
    instance: &ProblemInstance,
    config: &SolverConfig,
    dist: &dyn Fn(&Point) -> Result<f64>,
    iterations: usize,
) -> Result<f64> {
    let mut r = rng::seeded(config.seed ^ 0x5eed);
    let x0 = random_point(&mut r, instance.dimension(), 4.0);
    let mut state = initial_state(instance, config, &x0)?;
    let mut sampler = Sampler::new(&config.sampling, instance.constraint_count(), config.seed)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..iterations {
        sham_step(instance, &mut state, config, &mut sampler)?;
        worst = worst.max(dist(&state.x)? - dist(&state.v)?);
    }
    Ok(worst)
}

fn descent_config(instance: &ProblemInstance, beta: f64, gamma: f64, seed: u64) -> SolverConfig {
    let l_f = instance.objective.l_f;
    let mut cfg = SolverConfig::new(StepsizeSchedule::ConvexChoice2 { alpha0: 1.0 / l_f });
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.stopping = None;
    cfg
}

/// Per-iteration check that the halfspace step never moves the gradient point
/// further from the feasible set, on instances with exact distance formulas
/// (zero tolerance). One report per instance.
pub fn distance_decrease_exact_suite(
    iterations: usize,
    seeds: &[u64],
    betas: &[f64],
    gammas: &[f64],
) -> Vec<CheckReport> {
    exact_cases()
        .into_iter()
        .map(|case| {
            let dist = |x: &Point| Ok((case.dist)(x));
            let mut failures = 0;
            let mut worst = f64::NEG_INFINITY;
            let mut total = 0;
            for &beta in betas {
                for &gamma in gammas {
                    for &seed in seeds {
                        let cfg = descent_config(&case.instance, beta, gamma, seed);
                        total += 1;
                        match max_distance_increase(&case.instance, &cfg, &dist, iterations) {
                            Ok(w) => {
                                worst = worst.max(w);
                                if w > 0.0 {
                                    failures += 1;
                                }
                            }
                            Err(_) => failures += 1,
                        }
                    }
                }
            }
            CheckReport::new(format!("distance decrease ({})", case.name), failures, total, worst)
        })
        .collect()
}

/// Euclidean projection onto `{y : a_i^T y <= b_i}` by Hildreth's dual
/// coordinate ascent; exact up to the sweep tolerance.
fn project_polyhedron(p: &Point, rows: &[(Point, f64)]) -> Point {
    let mut y = p.clone();
    let mut lambda = vec![0.0; rows.len()];
    for _ in 0..100_000 {
        let mut moved = 0.0f64;
        for ((a, b), l) in rows.iter().zip(lambda.iter_mut()) {
            let nn = a.norm_squared();
            let next = (*l + (a.dot(&y) - b) / nn).max(0.0);
            let delta = next - *l;
            if delta != 0.0 {
                y.axpy(-delta, a, 1.0);
                *l = next;
                moved = moved.max(delta.abs() * nn.sqrt());
            }
        }
        if moved <= 1e-15 * (1.0 + p.norm()) {
            break;
        }
    }
    y
}

/// In two dimensions every generated cone constraint has a single row, so
/// `|Q y + a| <= q^T y + b` is the pair of halfspaces `(+-Q - q)^T y <= b -+ a`
/// and the feasible set is a polygon.
fn polygon_rows(instance: &ProblemInstance) -> Vec<(Point, f64)> {
    let mut rows = Vec::new();
    for c in instance.constraints.constraints() {
        let Constraint::Soc(d) = c else { unreachable!("generated instances are SOC") };
        assert_eq!(d.q_mat.nrows(), 1);
        let qrow = d.q_mat.row(0).transpose();
        rows.push((&qrow - &d.q, d.b - d.a[0]));
        rows.push((-&qrow - &d.q, d.b + d.a[0]));
    }
    let y = &instance.simple_set;
    for i in 0..2 {
        let e = Point::from_fn(2, |r, _| if r == i { 1.0 } else { 0.0 });
        rows.push((e.clone(), y.hi[i]));
        rows.push((-e, -y.lo[i]));
    }
    rows
}

/// Same check on generated two-dimensional instances, measuring distance by
/// exact polygon projection; allows slack `1e-6` for the projection tolerance.
pub fn distance_decrease_polygon_suite(iterations: usize, seeds: &[u64], betas: &[f64]) -> CheckReport {
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut total = 0;
    for instance_seed in [7, 8, 9] {
        let instance = generate_instance(2, 3, 0.0, instance_seed).expect("generator");
        let rows = polygon_rows(&instance);
        let dist = |x: &Point| -> Result<f64> {
            if rows.iter().all(|(a, b)| a.dot(x) <= *b) {
                return Ok(0.0);
            }
            Ok((x - project_polyhedron(x, &rows)).norm())
        };
        for &beta in betas {
            for &seed in seeds {
                let cfg = descent_config(&instance, beta, 1.0, seed);
                total += 1;
                match max_distance_increase(&instance, &cfg, &dist, iterations) {
                    Ok(w) => {
                        worst = worst.max(w);
                        if w > 1e-6 {
                            failures += 1;
                        }
                    }
                    Err(_) => failures += 1,
                }
            }
        }
    }
    CheckReport::new("distance decrease (generated polygons)", failures, total, worst)
}

/// The log-log fit recovers exact power laws `C k^p` to `1e-9`.
pub fn rate_fit_suite() -> CheckReport {
    let mut failures = 0;
    let mut worst = 0.0f64;
    let cases = [(-0.5, 1.0), (-1.0, 5.0), (-2.0, 0.3), (-0.35, 12.0)];
    for (p, c) in cases {
        let records: Vec<RunRecord> = (1..=200)
            .map(|i| {
                let k = 50 * i;
                RunRecord { k, feas_sq_avg: c * (k as f64).powf(p), ..RunRecord::default() }
            })
            .collect();
        match rate_fit(&records, RateQuantity::FeasSqAvg, DEFAULT_BURN_IN) {
            Ok(slope) => {
                worst = worst.max((slope - p).abs());
                if (slope - p).abs() > 1e-9 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    CheckReport::new("rate fit", failures, cases.len(), worst)
}

/// The fast suites, in the order the CLI prints them.
pub fn quick_suites(seed: u64) -> Vec<CheckReport> {
    let betas = [0.5, 0.96, 1.5];
    let seeds: Vec<u64> = (0..5).map(|s| seed.wrapping_add(s)).collect();
    let mut out = vec![
        halfspace_identity_suite(10_000, seed, relaxed_halfspace_step),
        subgradient_suite(10_000, seed),
        switching_schedule_suite(),
        stopping_suite(),
        rate_fit_suite(),
    ];
    out.extend(distance_decrease_exact_suite(1000, &seeds, &betas, &[1.0, 0.5]));
    out.push(distance_decrease_polygon_suite(1000, &seeds, &betas));
    out
}
