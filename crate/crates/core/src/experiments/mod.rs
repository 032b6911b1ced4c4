//! Metrics, stopping rules, rate diagnostics and record emission.

mod rate;
mod records;
mod stopping;
mod sweep;
mod theory;

pub use rate::{log_log_slope, rate_fit, RateQuantity, DEFAULT_BURN_IN};
pub use records::{emit_records, read_records, RecordFormat, RunRecord, CSV_HEADER};
pub use stopping::{stopping_check, StopDecision, StopInputs, StoppingCriteria};
pub use sweep::{curve_at, curve_slope, mean_curve, run_seeds, Backend};
pub use theory::{theory_constants, EmpiricalConstants, TheoryConstantsReport};

use crate::problem::{ConstraintOracle, ObjectiveOracle, ProblemInstance, SimpleSet};
use crate::Point;

/// `||max(0, h(x))||^2 = sum_j ((h_j(x))_+)^2`.
pub fn feasibility_sq<F, C, Y>(instance: &ProblemInstance<F, C, Y>, x: &Point) -> f64
where
    F: ObjectiveOracle,
    C: ConstraintOracle,
    Y: SimpleSet,
{
    (0..instance.constraints.count())
        .map(|j| instance.constraints.value(j, x).max(0.0).powi(2))
        .sum()
}
