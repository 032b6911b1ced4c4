//! Stochastic halfspace approximation solver for smooth convex objectives
//! subject to many nonsmooth convex functional constraints `h_j(x) <= 0`.
//!
//! Each iteration takes a projected gradient step on the objective, samples
//! one constraint, linearizes it at a point between the previous iterate and
//! the gradient point, and applies a relaxed projection onto that halfspace.
//!
//! The crate is organized as:
//! - [`problem`]: oracle traits, constraint families, the box projector, the
//!   random instance generator and the instance file format.
//! - [`linearization`]: constraint linearizations and the relaxed halfspace step.
//! - [`solver`]: the iteration itself, stepsize schedules, sampling and averaging.
//! - [`oracles`]: brute-force and deterministic reference solvers plus
//!   distance and regularity diagnostics.
//! - [`experiments`]: metrics, stopping rules, rate fits and record emission.
//! - [`verification`]: property suites shared by the CLI `verify` command.
//!
//! With the default `parallel` feature, independent work (seed sweeps, grid
//! scans, sampled estimators) runs on the rayon thread pool; without it the
//! same code paths run sequentially and produce identical results.

pub mod error;
pub mod experiments;
pub mod linearization;
pub mod oracles;
pub mod par;
pub mod problem;
pub mod rng;
pub mod solver;
pub mod verification;

pub use error::{Result, ShamError};
pub use linearization::{relaxed_halfspace_step, ConstraintLinearization};
pub use problem::{
    generate_instance, BoxSet, Constraint, ConstraintOracle, ConstraintSet, ObjectiveOracle,
    ProblemInstance, QuadraticObjective, SimpleSet, SocConstraintData,
};
pub use solver::{
    run, sham_step, AverageMode, RunOutcome, Sampler, SamplingScheme, SolverConfig, SolverState,
    StepsizeSchedule, StopReason,
};

/// Dense point / vector type used throughout the crate.
pub type Point = nalgebra::DVector<f64>;
/// Dense matrix type used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
