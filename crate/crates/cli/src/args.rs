use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "sham", version, about = "Stochastic halfspace approximation solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random SOC-constrained quadratic instance.
    Generate(Common),
    /// Run the solver once and write records plus a summary.
    Solve(Common),
    /// Run over several seeds and tabulate iterations and time to stop.
    Benchmark(Common),
    /// Run the built-in verification suites.
    Verify(Common),
}

/// Every tunable. All fields are optional so a JSON config file (`--config`)
/// can supply values that flags then override.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Common {
    /// JSON file with any of these settings; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SHAM_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Instance file; when absent an instance is generated from --n/--m/--mu.
    #[arg(long)]
    pub instance: Option<PathBuf>,

    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Seed of the generated instance.
    #[arg(long)]
    pub instance_seed: Option<u64>,
    /// Sampler seed (and instance seed for `generate`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated seeds for `benchmark`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,

    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// choice1-k1, choice1-k2, choice2 or switching.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Initial stepsize of the convex schedules (default 1/L_f).
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub record_every: Option<usize>,

    #[arg(long)]
    pub feas_tol: Option<f64>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long)]
    pub stagnation_tol: Option<f64>,
    #[arg(long)]
    pub window_m: Option<usize>,
    /// Run the whole budget regardless of the stopping rule.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_stopping: Option<bool>,

    /// Record file format: csv or jsonl.
    #[arg(long)]
    pub format: Option<String>,
    /// Store elapsed time in records (makes record files run-dependent).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub wall_clock: Option<bool>,

    /// Known optimal value for the gap-based stopping rule.
    #[arg(long)]
    pub fstar: Option<f64>,
    /// Estimate f* before solving: baseline or grid.
    #[arg(long)]
    pub compute_fstar: Option<String>,
    #[arg(long)]
    pub baseline_iters: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Half-width of the grid box around the origin.
    #[arg(long)]
    pub grid_radius: Option<f64>,
    /// Samples for the regularity-constant estimate in the summary (0 skips it).
    #[arg(long)]
    pub regularity_samples: Option<usize>,

    /// `benchmark`: tabulate gamma in {0, 1} by mu in {0, --mu-sc}.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub grid: Option<bool>,
    /// Strong convexity used for the mu > 0 column of the benchmark grid.
    #[arg(long)]
    pub mu_sc: Option<f64>,
}

macro_rules! overlay {
    ($hi:ident, $lo:ident, $($f:ident),*) => {
        Common { config: None, $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Common {
    /// Field-wise `self` falling back to `lower`.
    pub fn over(self, lower: Common) -> Common {
        overlay!(
            self, lower, out, instance, n, m, mu, instance_seed, seed, seeds, beta, gamma,
            schedule, alpha0, max_iters, record_every, feas_tol, gap_tol, stagnation_tol,
            window_m, no_stopping, format, wall_clock, fstar, compute_fstar, baseline_iters,
            grid_points, grid_radius, regularity_samples, grid, mu_sc
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file: Common = serde_json::from_str(r#"{"beta": 0.5, "n": 7, "seeds": [1, 2]}"#).unwrap();
        let flags = Common { beta: Some(0.9), ..Common::default() };
        let merged = flags.over(file);
        assert_eq!(merged.beta, Some(0.9));
        assert_eq!(merged.n, Some(7));
        assert_eq!(merged.seeds, Some(vec![1, 2]));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<Common>(r#"{"betta": 0.5}"#).is_err());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["sham", "solve", "--n", "3", "--seeds", "1,2", "--wall-clock"]).unwrap();
        match cli.command {
            Command::Solve(c) => {
                assert_eq!(c.n, Some(3));
                assert_eq!(c.seeds, Some(vec![1, 2]));
                assert_eq!(c.wall_clock, Some(true));
            }
            _ => panic!("wrong subcommand"),
        }
    }
}
