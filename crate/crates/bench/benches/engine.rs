use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ranslice_bench::{descriptors, loaded_orchestrator, sim_config};
use ranslice_core::descriptor::validate;
use ranslice_core::sim::run;
use ranslice_core::Scenario;

fn simulate(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_200_ticks");
    for k in [2, 4, 8] {
        let ds = descriptors(k);
        let config = sim_config(k, Scenario::S4DuShared, 200);
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| b.iter(|| run(black_box(&ds), &config).unwrap()));
    }
    g.finish();
}

fn allocate(c: &mut Criterion) {
    let mut g = c.benchmark_group("allocate_prbs");
    for k in [2, 8, 16] {
        let o = loaded_orchestrator(k, Scenario::S2AllShared, 10);
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter_batched_ref(
                || o.clone(),
                |o| o.allocate_prbs(black_box(273)).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn validation(c: &mut Criterion) {
    let ds = descriptors(16);
    c.bench_function("validate_16_slices", |b| b.iter(|| validate(black_box(&ds))));
}

criterion_group!(benches, simulate, allocate, validation);
criterion_main!(benches);
