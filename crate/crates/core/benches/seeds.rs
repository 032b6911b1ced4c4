// Multi-seed runs through the rayon backend versus the sequential fallback.
// Build with `--no-default-features` to make both arms sequential.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sham::experiments::{run_seeds, Backend};
use sham::{generate_instance, Point, SolverConfig, StepsizeSchedule};

fn seeds(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_seeds");
    group.sample_size(10);
    for &(n, m) in &[(20, 50), (100, 100)] {
        let inst = generate_instance(n, m, 0.0, 1).unwrap();
        let l_f = inst.objective.l_f;
        let mut cfg = SolverConfig::new(StepsizeSchedule::convex_choice2(1.0 / l_f, l_f).unwrap());
        cfg.max_iterations = 5_000;
        cfg.stopping = None;
        cfg.record_every = 1_000;
        let x0 = Point::zeros(n);
        let seed_list: Vec<u64> = (1..=8).collect();
        for (name, backend) in [("parallel", Backend::Parallel), ("sequential", Backend::Sequential)] {
            group.bench_with_input(BenchmarkId::new(name, format!("n{n}_m{m}")), &backend, |b, &backend| {
                b.iter(|| run_seeds(&inst, &cfg, &x0, &seed_list, backend).unwrap())
            });
        }
    }
    group.finish();
}

fn gamma_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("gamma_grid");
    group.sample_size(10);
    let inst = generate_instance(20, 50, 1.0, 1).unwrap();
    let l_f = inst.objective.l_f;
    let x0 = Point::zeros(20);
    let configs: Vec<SolverConfig> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&gamma| {
            let mut cfg = SolverConfig::new(StepsizeSchedule::switching(l_f, 1.0).unwrap());
            cfg.gamma = gamma;
            cfg.max_iterations = 5_000;
            cfg.stopping = None;
            cfg.record_every = 1_000;
            cfg
        })
        .collect();
    let seed_list = [1, 2, 3, 4];
    for (name, backend) in [("parallel", Backend::Parallel), ("sequential", Backend::Sequential)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                for cfg in &configs {
                    run_seeds(&inst, cfg, &x0, &seed_list, backend).unwrap();
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, seeds, gamma_grid);
criterion_main!(benches);
