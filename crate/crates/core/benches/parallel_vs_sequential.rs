use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use iscc_core::comm_model::{generate_scenario, ScenarioParams};
use iscc_core::exec::Exec;
use iscc_core::optimizer::{solve_exhaustive, Instance, SolveOptions};
use iscc_core::sensing_model::{AlphaModel, ClassSet, SensingParams};
use iscc_core::signal_sim::{power_samples, ClassState, SyntheticClassSpec};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_power_samples(c: &mut Criterion) {
    let sp = SensingParams::default();
    let cs = ClassSet::synthetic_default(&sp);
    let spec = SyntheticClassSpec::matched(&cs.actions()[0], &sp, ClassState::Action).unwrap();
    let mut group = c.benchmark_group("power_samples_4k");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| power_samples(&spec, &sp, 200.0, 4_096, black_box(7), exec).unwrap())
        });
    }
    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let sp = SensingParams::default();
    let cs = ClassSet::synthetic_default(&sp);
    let am = AlphaModel::default();
    let s = generate_scenario(10, 0.3, &ScenarioParams::default(), 3).unwrap();
    let inst = Instance { scenario: &s, sensing: &sp, classes: &cs, alpha: &am };
    let mut group = c.benchmark_group("solve_exhaustive_step5");
    group.sample_size(10);
    for (name, exec) in STRATEGIES {
        let opts = SolveOptions { step: 5, exec, ..SolveOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, &opts| {
            b.iter(|| solve_exhaustive(black_box(&inst), opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_power_samples, bench_solve);
criterion_main!(benches);
