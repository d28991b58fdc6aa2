use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dqprep_bench::workload;
use dqprep_core::{
    dqrat_eliminate_pass, run_pipeline, unit_propagate, universal_reduce, upla_pass, vivify_pass, PipelineConfig,
    UplaCandidates,
};

const SCALE: usize = 30;

fn passes(c: &mut Criterion) {
    let formulas = workload(42, SCALE, 16);
    let mut group = c.benchmark_group("passes");
    group.bench_function("universal_reduce", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| universal_reduce(black_box(f)).num_literals())
                .sum::<usize>()
        })
    });
    group.bench_function("unit_propagate", |b| {
        b.iter(|| {
            formulas
                .iter()
                .filter(|f| unit_propagate(black_box(f)).is_conflict())
                .count()
        })
    });
    group.bench_function("vivify_pass", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| vivify_pass(black_box(f), 10_000).1.literals_removed)
                .sum::<usize>()
        })
    });
    group.bench_function("upla_pass", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| upla_pass(black_box(f), UplaCandidates::All).1.units_added)
                .sum::<usize>()
        })
    });
    group.bench_function("dqrat_eliminate_pass", |b| {
        b.iter(|| {
            formulas
                .iter()
                .map(|f| dqrat_eliminate_pass(black_box(f)).1.clauses_removed)
                .sum::<usize>()
        })
    });
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let config = PipelineConfig::default();
    let mut group = c.benchmark_group("pipeline");
    for scale in [15, 30, 60] {
        let formulas = workload(7, scale, 8);
        group.bench_function(format!("default/{scale}"), |b| {
            b.iter_batched(
                || formulas.clone(),
                |fs| {
                    fs.iter()
                        .map(|f| run_pipeline(&config, f).unwrap().rounds)
                        .sum::<usize>()
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, passes, pipeline);
criterion_main!(benches);
