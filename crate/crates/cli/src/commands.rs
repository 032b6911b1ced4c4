use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use sham::experiments::{
    emit_records, theory_constants, EmpiricalConstants, RecordFormat, StoppingCriteria,
};
use sham::oracles::{baseline_solver, brute_force_min_grid, estimate_regularity_constant};
use sham::problem::io::{read_instance, write_instance, write_json};
use sham::problem::GENERATOR_VERSION;
use sham::solver::Sampler;
use sham::verification::quick_suites;
use sham::{
    generate_instance, par, run, BoxSet, Point, ProblemInstance, RunOutcome, ShamError,
    SolverConfig, StepsizeSchedule, StopReason,
};

use crate::args::Common;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ShamError> for CliError {
    fn from(e: ShamError) -> Self {
        let code = match e {
            ShamError::NumericalFailure { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: message.into() }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Settings with every default filled in. `alpha0` and `schedule` stay
/// unset until an instance is known.
pub fn with_defaults(c: Common) -> Common {
    Common {
        config: None,
        out: Some(c.out.unwrap_or_else(|| PathBuf::from("."))),
        instance: c.instance,
        n: Some(c.n.unwrap_or(100)),
        m: Some(c.m.unwrap_or(100)),
        mu: Some(c.mu.unwrap_or(0.0)),
        instance_seed: Some(c.instance_seed.unwrap_or(1)),
        seed: Some(c.seed.unwrap_or(0)),
        seeds: Some(c.seeds.unwrap_or_else(|| (1..=5).collect())),
        beta: Some(c.beta.unwrap_or(sham::solver::DEFAULT_BETA)),
        gamma: Some(c.gamma.unwrap_or(sham::solver::DEFAULT_GAMMA)),
        schedule: c.schedule,
        alpha0: c.alpha0,
        max_iters: Some(c.max_iters.unwrap_or(100_000)),
        record_every: Some(c.record_every.unwrap_or(100)),
        feas_tol: Some(c.feas_tol.unwrap_or(1e-2)),
        gap_tol: Some(c.gap_tol.unwrap_or(1e-2)),
        stagnation_tol: Some(c.stagnation_tol.unwrap_or(1e-3)),
        window_m: Some(c.window_m.unwrap_or(10)),
        no_stopping: Some(c.no_stopping.unwrap_or(false)),
        format: Some(c.format.unwrap_or_else(|| "csv".into())),
        wall_clock: Some(c.wall_clock.unwrap_or(false)),
        fstar: c.fstar,
        compute_fstar: Some(c.compute_fstar.unwrap_or_else(|| "none".into())),
        baseline_iters: Some(c.baseline_iters.unwrap_or(1_000_000)),
        grid_points: Some(c.grid_points.unwrap_or(2001)),
        grid_radius: Some(c.grid_radius.unwrap_or(10.0)),
        regularity_samples: Some(c.regularity_samples.unwrap_or(100)),
        grid: Some(c.grid.unwrap_or(false)),
        mu_sc: Some(c.mu_sc.unwrap_or(1.0)),
    }
}

fn print_effective(command: &str, c: &Common) {
    let block = json!({ "command": command, "settings": c });
    println!("{}", serde_json::to_string_pretty(&block).expect("settings serialize"));
}

// `with_defaults` fills these; a `None` here is a programming error.
fn get<T: Clone>(v: &Option<T>) -> T {
    v.clone().expect("default filled")
}

fn out_dir(c: &Common) -> CliResult<PathBuf> {
    let dir = get(&c.out);
    std::fs::create_dir_all(&dir)
        .map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_or_generate(c: &Common, mu: f64) -> CliResult<ProblemInstance> {
    match &c.instance {
        Some(path) => Ok(read_instance(path)?),
        None => Ok(generate_instance(get(&c.n), get(&c.m), mu, get(&c.instance_seed))?),
    }
}

pub fn default_schedule_name(mu: f64) -> &'static str {
    if mu > 0.0 {
        "switching"
    } else {
        "choice1-k1"
    }
}

fn build_schedule(name: &str, alpha0: f64, inst: &ProblemInstance) -> CliResult<StepsizeSchedule> {
    let (l_f, mu) = (inst.objective.l_f, inst.objective.mu);
    let s = match name {
        "choice1-k1" | "choice1_k1" => StepsizeSchedule::convex_choice1_shifted(alpha0, l_f)?,
        "choice1-k2" | "choice1_k2" => StepsizeSchedule::convex_choice1(alpha0, l_f)?,
        "choice2" => StepsizeSchedule::convex_choice2(alpha0, l_f)?,
        "switching" => StepsizeSchedule::switching(l_f, mu)?,
        other => {
            return Err(usage(format!(
                "unknown schedule '{other}' (choice1-k1, choice1-k2, choice2, switching)"
            )))
        }
    };
    Ok(s)
}

fn record_format(c: &Common) -> CliResult<RecordFormat> {
    get(&c.format).parse::<RecordFormat>().map_err(CliError::from)
}

fn estimate_fstar(c: &Common, inst: &ProblemInstance) -> CliResult<Option<f64>> {
    if let Some(f) = c.fstar {
        return Ok(Some(f));
    }
    match get(&c.compute_fstar).as_str() {
        "none" => Ok(inst.known_fstar),
        "baseline" => Ok(Some(baseline_solver(inst, get(&c.baseline_iters))?.fstar_estimate)),
        "grid" => {
            let r = get(&c.grid_radius);
            let bounds = BoxSet::uniform(inst.dimension(), -r, r)?;
            Ok(Some(brute_force_min_grid(inst, &bounds, get(&c.grid_points))?.fstar_estimate))
        }
        other => Err(usage(format!("unknown --compute-fstar '{other}' (none, baseline, grid)"))),
    }
}

fn solver_config(c: &Common, schedule: StepsizeSchedule, fstar: Option<f64>, seed: u64) -> SolverConfig {
    let mut cfg = SolverConfig::new(schedule);
    cfg.beta = get(&c.beta);
    cfg.gamma = get(&c.gamma);
    cfg.max_iterations = get(&c.max_iters);
    cfg.record_every = get(&c.record_every);
    cfg.seed = seed;
    cfg.record_wall_time = get(&c.wall_clock);
    cfg.stopping = if get(&c.no_stopping) {
        None
    } else {
        Some(StoppingCriteria {
            feas_tol: get(&c.feas_tol),
            gap_tol: get(&c.gap_tol),
            stagnation_tol: get(&c.stagnation_tol),
            window_m: get(&c.window_m),
            fstar,
            check_every: None,
        })
    };
    cfg
}

/// Instance-dependent settings resolved, config validated.
struct Prepared {
    settings: Common,
    instance: ProblemInstance,
    fstar: Option<f64>,
}

fn prepare(c: Common, mu: f64) -> CliResult<Prepared> {
    let mut settings = c;
    let instance = load_or_generate(&settings, mu)?;
    let l_f = instance.objective.l_f;
    let name = settings
        .schedule
        .clone()
        .unwrap_or_else(|| default_schedule_name(instance.objective.mu).to_string());
    settings.schedule = Some(name);
    settings.alpha0 = Some(settings.alpha0.unwrap_or(1.0 / l_f));
    let fstar = estimate_fstar(&settings, &instance)?;
    settings.fstar = fstar;
    if settings.instance.is_some() {
        settings.n = Some(instance.dimension());
        settings.m = Some(instance.constraint_count());
        settings.mu = Some(instance.objective.mu);
    }
    Ok(Prepared { settings, instance, fstar })
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::Stagnated => "stagnated",
        StopReason::BudgetExhausted => "budget_exhausted",
    }
}

pub fn generate(c: Common) -> CliResult<i32> {
    // For generation the sampler seed doubles as the instance seed when given.
    let mut c = c;
    if c.instance_seed.is_none() {
        c.instance_seed = c.seed;
    }
    let c = with_defaults(c);
    let seed = get(&c.instance_seed);
    print_effective("generate", &c);
    let (n, m, mu) = (get(&c.n), get(&c.m), get(&c.mu));
    let inst = generate_instance(n, m, mu, seed)?;
    let dir = out_dir(&c)?;
    let stem = format!("instance_n{n}_m{m}_mu{mu}_seed{seed}");
    let path = dir.join(format!("{stem}.json"));
    write_instance(&path, &inst)?;
    let meta = json!({
        "seed": seed,
        "generator_version": GENERATOR_VERSION,
        "L_f": inst.objective.l_f,
        "n": n,
        "m": m,
        "mu": mu,
    });
    write_json(&dir.join(format!("{stem}.meta.json")), &meta)?;
    eprintln!("wrote {}", path.display());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FinalMetrics {
    f_last: f64,
    f_avg: f64,
    feas_sq_last: f64,
    feas_sq_avg: f64,
    max_viol_last: f64,
}

fn theory_block(c: &Common, inst: &ProblemInstance, cfg: &SolverConfig, out: &RunOutcome) -> serde_json::Value {
    let samples = get(&c.regularity_samples);
    if samples == 0 {
        return json!({ "skipped": "regularity_samples = 0" });
    }
    let attempt = || -> sham::Result<_> {
        let c_emp = estimate_regularity_constant(inst, &inst.simple_set, samples, cfg.seed)?;
        let rho = Sampler::new(&cfg.sampling, inst.constraint_count(), cfg.seed)?.rho();
        theory_constants(
            inst.objective.l_f,
            inst.objective.mu,
            inst.constraint_count(),
            cfg.beta,
            cfg.gamma,
            EmpiricalConstants {
                b_f: out.state.grad_norm_max,
                b_h: inst.constraints.observed_subgradient_bound(),
                c: c_emp,
                rho,
            },
        )
    };
    match attempt() {
        Ok(report) => serde_json::to_value(report).expect("report serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn solve(c: Common) -> CliResult<i32> {
    let c = with_defaults(c);
    let mu = get(&c.mu);
    let p = prepare(c, mu)?;
    let c = p.settings;
    print_effective("solve", &c);
    let format = record_format(&c)?;
    let schedule = build_schedule(&get(&c.schedule), get(&c.alpha0), &p.instance)?;
    let cfg = solver_config(&c, schedule, p.fstar, get(&c.seed));
    cfg.validate()?;
    if cfg.outside_theory() {
        eprintln!("warning: beta = {} is outside (0, 1); rate guarantees do not apply", cfg.beta);
    }
    if cfg.stopping.is_some() && p.fstar.is_none() {
        eprintln!("warning: no f* available; stopping falls back to the stagnation rule");
    }
    let dir = out_dir(&c)?;

    let out = run(&p.instance, &cfg, &Point::zeros(p.instance.dimension()))?;
    let seed = cfg.seed;
    let records_name = format!("records_seed{seed}.{}", format.extension());
    emit_records(&out.records, &dir.join(&records_name), format)?;

    let avg = out.state.primary_average();
    let inst = &p.instance;
    let metrics = FinalMetrics {
        f_last: sham::ObjectiveOracle::value(&inst.objective, &out.state.x),
        f_avg: sham::ObjectiveOracle::value(&inst.objective, &avg),
        feas_sq_last: sham::experiments::feasibility_sq(inst, &out.state.x),
        feas_sq_avg: sham::experiments::feasibility_sq(inst, &avg),
        max_viol_last: inst.max_violation(&out.state.x),
    };
    let m = inst.constraint_count();
    let summary = json!({
        "settings": &c,
        "stop_reason": stop_name(out.stop),
        "iterations": out.state.k,
        "epochs": out.state.k as f64 / m as f64,
        "final": metrics,
        "fstar": p.fstar,
        "gap_avg": p.fstar.map(|f| (metrics.f_avg - f).abs()),
        "beta_outside_theory": cfg.outside_theory(),
        "L_f": inst.objective.l_f,
        "mu": inst.objective.mu,
        "theory_constants": theory_block(&c, inst, &cfg, &out),
        "records_file": records_name,
        "wall_ns": out.wall_ns,
    });
    let summary_path = dir.join(format!("summary_seed{seed}.json"));
    write_json(&summary_path, &summary)?;
    eprintln!(
        "stop={} k={} epochs={:.2} f_avg={:.6e} feas_sq_avg={:.3e}",
        stop_name(out.stop),
        out.state.k,
        out.state.k as f64 / m as f64,
        metrics.f_avg,
        metrics.feas_sq_avg
    );
    eprintln!("wrote {}", summary_path.display());
    Ok(if out.stop == StopReason::BudgetExhausted { EXIT_BUDGET } else { EXIT_OK })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Spread {
    min: f64,
    mean: f64,
    max: f64,
}

fn spread(values: &[f64]) -> Option<Spread> {
    if values.is_empty() {
        return None;
    }
    Some(Spread {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

#[derive(Debug, Serialize)]
struct Cell {
    gamma: f64,
    mu: f64,
    schedule: String,
    fstar: Option<f64>,
    runs: usize,
    converged: usize,
    stagnated: usize,
    budget_exhausted: usize,
    failures: Vec<String>,
    iterations: Option<Spread>,
    epochs: Option<Spread>,
    wall_ms: Option<Spread>,
}

fn bench_cell(c: &Common, gamma: f64, mu: f64, seeds: &[u64]) -> CliResult<Cell> {
    let mut c = c.clone();
    c.gamma = Some(gamma);
    let p = prepare(c, mu)?;
    let schedule = build_schedule(&get(&p.settings.schedule), get(&p.settings.alpha0), &p.instance)?;
    let x0 = Point::zeros(p.instance.dimension());
    let runs = par::map(seeds, |&seed| {
        let cfg = solver_config(&p.settings, schedule, p.fstar, seed);
        cfg.validate().and_then(|_| run(&p.instance, &cfg, &x0))
    });
    let m = p.instance.constraint_count() as f64;
    let mut cell = Cell {
        gamma,
        mu: p.instance.objective.mu,
        schedule: get(&p.settings.schedule),
        fstar: p.fstar,
        runs: seeds.len(),
        converged: 0,
        stagnated: 0,
        budget_exhausted: 0,
        failures: Vec::new(),
        iterations: None,
        epochs: None,
        wall_ms: None,
    };
    let (mut iters, mut times) = (Vec::new(), Vec::new());
    for (seed, r) in seeds.iter().zip(runs) {
        match r {
            Ok(out) => {
                match out.stop {
                    StopReason::Converged => cell.converged += 1,
                    StopReason::Stagnated => cell.stagnated += 1,
                    StopReason::BudgetExhausted => cell.budget_exhausted += 1,
                }
                iters.push(out.state.k as f64);
                times.push(out.wall_ns as f64 / 1e6);
            }
            Err(e) => cell.failures.push(format!("seed {seed}: {e}")),
        }
    }
    cell.iterations = spread(&iters);
    cell.epochs = spread(&iters.iter().map(|k| k / m).collect::<Vec<_>>());
    cell.wall_ms = spread(&times);
    Ok(cell)
}

fn fmt_spread(s: &Option<Spread>) -> String {
    match s {
        Some(s) => format!("{:>10.1} {:>10.1} {:>10.1}", s.min, s.mean, s.max),
        None => format!("{:>10} {:>10} {:>10}", "-", "-", "-"),
    }
}

pub fn benchmark(c: Common) -> CliResult<i32> {
    let c = with_defaults(c);
    print_effective("benchmark", &c);
    let seeds = get(&c.seeds);
    if seeds.is_empty() {
        return Err(usage("benchmark needs at least one seed"));
    }
    let grid = get(&c.grid);
    if grid && c.instance.is_some() {
        return Err(usage("--grid generates its own instances; drop --instance"));
    }
    let cell_list: Vec<(f64, f64)> = if grid {
        let mu_sc = get(&c.mu_sc);
        vec![(0.0, 0.0), (1.0, 0.0), (0.0, mu_sc), (1.0, mu_sc)]
    } else {
        vec![(get(&c.gamma), get(&c.mu))]
    };
    let mut cells = Vec::new();
    for (gamma, mu) in cell_list {
        // A grid cell with the schedule left open picks the default for its mu.
        let mut cc = c.clone();
        if grid && c.schedule.is_none() {
            cc.schedule = Some(default_schedule_name(mu).into());
        }
        cells.push(bench_cell(&cc, gamma, mu, &seeds)?);
    }

    println!(
        "{:>5} {:>6} {:>11} {:>4} {:>14} | {:^32} | {:^32}",
        "gamma", "mu", "schedule", "runs", "conv/stag/bud", "iterations min/mean/max", "wall ms min/mean/max"
    );
    for cell in &cells {
        let status = if cell.failures.is_empty() { "" } else { "  FAILED" };
        println!(
            "{:>5} {:>6} {:>11} {:>4} {:>14} | {} | {}{status}",
            cell.gamma,
            cell.mu,
            cell.schedule,
            cell.runs,
            format!("{}/{}/{}", cell.converged, cell.stagnated, cell.budget_exhausted),
            fmt_spread(&cell.iterations),
            fmt_spread(&cell.wall_ms),
        );
        for f in &cell.failures {
            eprintln!("  {f}");
        }
    }
    let dir = out_dir(&c)?;
    write_json(&dir.join("benchmark.json"), &json!({ "settings": &c, "cells": &cells }))?;
    let failed = cells.iter().any(|cell| !cell.failures.is_empty());
    Ok(if failed { EXIT_NUMERICAL } else { EXIT_OK })
}

pub fn verify(c: Common) -> CliResult<i32> {
    let seed = c.seed.unwrap_or(0);
    let reports = quick_suites(seed);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} suites, {} failed", reports.len(), failed);
    Ok(if failed == 0 { EXIT_OK } else { EXIT_USAGE })
}

/// Reads `--config` (if any) and overlays the flags on it.
pub fn resolve(flags: Common) -> CliResult<Common> {
    match flags.config.clone() {
        None => Ok(flags),
        Some(path) => {
            let file: Common = read_config(&path)?;
            Ok(flags.over(file))
        }
    }
}

fn read_config(path: &Path) -> CliResult<Common> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
    // Accept either bare settings or a printed effective-config block.
    let settings = value.get("settings").cloned().unwrap_or(value);
    serde_json::from_value(settings).map_err(|e| usage(format!("config {}: {e}", path.display())))
}
