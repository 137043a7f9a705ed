use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use slpmm::problems::QcqpInstance;
use slpmm::{estimate_expectations_with, run_replications, Execution, SolverConfig};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn expectations(c: &mut Criterion) {
    let problem = QcqpInstance::generate(20, 3, 2.0, 1).unwrap();
    let x = problem.spread_start();
    let mut group = c.benchmark_group("estimate_expectations");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 20_000), &exec, |b, &exec| {
            b.iter(|| estimate_expectations_with(&problem, black_box(&x), 20_000, 3, exec).unwrap())
        });
    }
    group.finish();
}

fn replications(c: &mut Criterion) {
    let problem = QcqpInstance::generate(20, 3, 2.0, 1).unwrap();
    let config = SolverConfig {
        record_wall_time: false,
        ..SolverConfig::new(400)
    };
    let seeds: Vec<u64> = (0..8).collect();
    let mut group = c.benchmark_group("run_replications");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, seeds.len()), &exec, |b, &exec| {
            b.iter(|| run_replications(&problem, &config, black_box(&seeds), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, expectations, replications);
criterion_main!(benches);
