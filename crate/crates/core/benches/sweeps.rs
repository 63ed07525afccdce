use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pon_sleep::experiment::{
    run_analytic_with, run_simulation_with, ExperimentConfig, Overrides, RawConfig, TrafficKind,
};
use pon_sleep::parallel::Execution;

fn config(o: Overrides) -> ExperimentConfig {
    let mut raw = RawConfig::default();
    raw.apply(&o).unwrap();
    raw.resolve().unwrap()
}

fn analytic_sweep(c: &mut Criterion) {
    let cfg = config(Overrides {
        sweep: Some("lambda=1,4,7,10,13,16,19,20,22,25,28,30,31,34,37,40".into()),
        listen_down: Some(8),
        listen_up: Some(8),
        ..Overrides::default()
    });
    let mut g = c.benchmark_group("analytic_sweep");
    g.bench_function("sequential", |b| {
        b.iter(|| run_analytic_with(black_box(&cfg), Execution::Sequential).unwrap())
    });
    g.bench_function("parallel", |b| {
        b.iter(|| run_analytic_with(black_box(&cfg), Execution::Parallel).unwrap())
    });
    g.finish();
}

fn simulation_sweep(c: &mut Criterion) {
    let cfg = config(Overrides {
        sweep: Some("N=1,2,3,4,6,8,12,16".into()),
        kind: Some(TrafficKind::SelfSimilar),
        lambda_gbps: Some(12.0),
        cycles: Some(4096),
        ..Overrides::default()
    });
    let mut g = c.benchmark_group("simulation_sweep");
    g.sample_size(10);
    g.bench_function("sequential", |b| {
        b.iter(|| run_simulation_with(black_box(&cfg), Execution::Sequential).unwrap())
    });
    g.bench_function("parallel", |b| {
        b.iter(|| run_simulation_with(black_box(&cfg), Execution::Parallel).unwrap())
    });
    g.finish();
}

criterion_group!(benches, analytic_sweep, simulation_sweep);
criterion_main!(benches);
