//! The stochastic halfspace approximation iteration.
//!
//! One step from `x_k`:
//!
//! ```text
//! u_k     = x_k - alpha_k grad f(x_k)
//! v_k     = P_Y(u_k)
//! j_k     ~ sampler
//! xt_k    = gamma v_k + (1 - gamma) x_k
//! z_k     = v_k - beta (l(v_k))_+ / ||g||^2 g,   l, g from h_{j_k} linearized at xt_k
//! x_{k+1} = P_Y(z_k)
//! ```
//!
//! Two weighted averages of the iterates are maintained incrementally: the
//! `alpha_t`-weighted one used for convex objectives, and the `(t+1)^2`-weighted
//! one that starts after the switching index `k0` of the strongly convex schedule.

mod sampler;
mod schedule;
mod state;

pub use sampler::{Sampler, SamplingScheme};
pub use schedule::{switching_index, StepsizeSchedule};
pub use state::{averaged_iterate, AverageMode, SolverState};

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::experiments::{
    feasibility_sq, stopping_check, RunRecord, StopDecision, StopInputs, StoppingCriteria,
};
use crate::problem::{ConstraintOracle, ObjectiveOracle, ProblemInstance, SimpleSet};
use crate::Point;

pub const DEFAULT_BETA: f64 = 0.96;
pub const DEFAULT_GAMMA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relaxation of the halfspace step, accepted in `(0, 2)`.
    pub beta: f64,
    /// Anchor weight: `xt = gamma v + (1 - gamma) x`.
    pub gamma: f64,
    pub schedule: StepsizeSchedule,
    pub sampling: SamplingScheme,
    pub max_iterations: usize,
    pub seed: u64,
    /// `None` runs the full budget.
    pub stopping: Option<StoppingCriteria>,
    /// Emit a record every this many iterations (and always at the end).
    pub record_every: usize,
    /// Store elapsed time in records. Off by default so record streams are reproducible.
    pub record_wall_time: bool,
}

impl SolverConfig {
    pub fn new(schedule: StepsizeSchedule) -> Self {
        Self {
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            schedule,
            sampling: SamplingScheme::Uniform,
            max_iterations: 100_000,
            seed: 0,
            stopping: Some(StoppingCriteria::default()),
            record_every: 100,
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 2.0) {
            return Err(ShamError::InvalidConfig(format!("beta = {} outside (0, 2)", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ShamError::InvalidConfig(format!("gamma = {} outside [0, 1]", self.gamma)));
        }
        if self.max_iterations == 0 {
            return Err(ShamError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.record_every == 0 {
            return Err(ShamError::InvalidConfig("record_every must be >= 1".into()));
        }
        if let Some(s) = &self.stopping {
            s.validate()?;
        }
        Ok(())
    }

    /// True when `beta` lies outside `(0, 1)`, where the rate guarantees apply.
    pub fn outside_theory(&self) -> bool {
        !(self.beta > 0.0 && self.beta < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Stagnated,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub records: Vec<RunRecord>,
    pub stop: StopReason,
    pub wall_ns: u64,
}

/// Builds the initial state for `config`, projecting `x0` onto `Y`.
pub fn initial_state<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    config: &SolverConfig,
    x0: &Point,
) -> Result<SolverState>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    crate::error::check_dim(instance.dimension(), x0.len())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(ShamError::InvalidInput("x0 must be finite".into()));
    }
    let start = config
        .schedule
        .switching_index()
        .map(|k0| (k0.max(-1) + 1) as usize);
    Ok(SolverState::new(instance.simple_set.project(x0), start))
}

fn finite_or(k: usize, quantity: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ShamError::NumericalFailure { k, quantity: quantity.to_string() })
    }
}

/// Performs one iteration, advancing `state` from `x_k` to `x_{k+1}`.
pub fn sham_step<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    state: &mut SolverState,
    config: &SolverConfig,
    sampler: &mut Sampler,
) -> Result<()>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    let k = state.k;
    let alpha = config.schedule.stepsize(k);

    let grad = instance.objective.gradient(&state.x);
    let grad_norm = grad.norm();
    finite_or(k, "objective gradient", grad_norm.is_finite())?;
    state.grad_norm_max = state.grad_norm_max.max(grad_norm);

    let mut u = state.x.clone();
    u.axpy(-alpha, &grad, 1.0);
    let v = instance.simple_set.project(&u);

    let j = sampler.sample();
    let mut anchor = v.clone();
    if config.gamma != 1.0 {
        anchor.axpy(1.0 - config.gamma, &state.x, config.gamma);
    }
    let (value, subgradient) = instance.constraints.value_and_subgradient(j, &anchor);
    finite_or(k, "constraint value", value.is_finite())?;
    finite_or(k, "constraint subgradient", subgradient.iter().all(|g| g.is_finite()))?;
    let lin = crate::linearization::ConstraintLinearization {
        anchor,
        value,
        subgradient,
        index: j,
    };

    let mut z = v.clone();
    lin.relax_in_place(&mut z, config.beta);
    let next = instance.simple_set.project(&z);
    finite_or(k, "iterate", next.iter().all(|x| x.is_finite()))?;

    state.last_step_norm_sq = (&next - &state.x).norm_squared();
    state.last_alpha = alpha;
    state.last_index = Some(j);
    state.u = u;
    state.v = v;
    state.anchor = lin.anchor;
    state.z = z;
    state.accumulate(k, alpha, &next);
    state.x = next;
    state.k = k + 1;
    Ok(())
}

fn make_record<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    state: &SolverState,
    wall_ns: u64,
) -> RunRecord
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    let avg = state.primary_average();
    RunRecord {
        k: state.k,
        f_last: instance.objective.value(&state.x),
        f_avg: instance.objective.value(&avg),
        feas_sq_last: feasibility_sq(instance, &state.x),
        feas_sq_avg: feasibility_sq(instance, &avg),
        max_viol_last: instance.max_violation(&state.x),
        alpha_k: state.last_alpha,
        sampled_j: state.last_index.unwrap_or(0),
        step_norm_sq: state.last_step_norm_sq,
        wall_ns,
    }
}

/// Runs from `x0` until a stopping rule fires or the iteration budget is spent.
///
/// The convergence branch of the stopping rule needs every constraint value,
/// so it is evaluated once per `check_every` iterations (default: one epoch of
/// `m` iterations). The stagnation window is checked every iteration.
pub fn run<F, C, Y>(
    instance: &ProblemInstance<F, C, Y>,
    config: &SolverConfig,
    x0: &Point,
) -> Result<RunOutcome>
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    config.validate()?;
    config.schedule.validate(instance.objective.smoothness())?;
    let mut state = initial_state(instance, config, x0)?;
    let mut sampler = Sampler::new(&config.sampling, instance.constraint_count(), config.seed)?;

    let criteria = config.stopping.clone().map(|mut c| {
        c.fstar = c.fstar.or(instance.known_fstar);
        c
    });
    let check_every = criteria
        .as_ref()
        .and_then(|c| c.check_every)
        .unwrap_or(instance.constraint_count())
        .max(1);
    let window = criteria.as_ref().map_or(1, |c| c.window_m);
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(window);

    let started = Instant::now();
    let elapsed = |on: bool| if on { started.elapsed().as_nanos() as u64 } else { 0 };
    let mut records = Vec::new();
    let mut stop = StopReason::BudgetExhausted;

    while state.k < config.max_iterations {
        sham_step(instance, &mut state, config, &mut sampler)?;

        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back(state.last_step_norm_sq);

        let mut decision = StopDecision::Continue;
        if let Some(c) = &criteria {
            let (feas, f) = if c.fstar.is_some() && state.k % check_every == 0 {
                (
                    Some(feasibility_sq(instance, &state.x)),
                    Some(instance.objective.value(&state.x)),
                )
            } else {
                (None, None)
            };
            recent.make_contiguous();
            decision = stopping_check(
                &StopInputs {
                    feas_sq: feas,
                    f_value: f,
                    recent_step_norms_sq: recent.as_slices().0,
                },
                c,
            );
        }
        let last = decision != StopDecision::Continue || state.k == config.max_iterations;
        if state.k % config.record_every == 0 || last {
            records.push(make_record(instance, &state, elapsed(config.record_wall_time)));
        }
        match decision {
            StopDecision::Continue => {}
            StopDecision::StopConverged => {
                stop = StopReason::Converged;
                break;
            }
            StopDecision::StopStagnated => {
                stop = StopReason::Stagnated;
                break;
            }
        }
    }

    Ok(RunOutcome {
        state,
        records,
        stop,
        wall_ns: started.elapsed().as_nanos() as u64,
    })
}
