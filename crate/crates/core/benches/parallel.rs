//! Compares the data-parallel sweep against its sequential fallback.
//!
//! With the default `parallel` feature the main entry points fan work out
//! across a thread pool; the `_seq` variants always run on one thread, so
//! the two benchmarks bound the speedup on the current machine.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use trace_calculus::harness::{exhaustive_ground_sweep, exhaustive_ground_sweep_seq, random_sweep};

fn bench_ground_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("exhaustive_ground_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let out = exhaustive_ground_sweep(black_box(2), black_box(4));
            assert!(out.all_equal());
            out.pairs_checked
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let out = exhaustive_ground_sweep_seq(black_box(2), black_box(4));
            assert!(out.all_equal());
            out.pairs_checked
        })
    });
    group.finish();
}

fn bench_random_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_sweep");
    group.sample_size(10);
    group.bench_function("100_systems_k4", |b| {
        b.iter(|| {
            let out = random_sweep(black_box(100), black_box(7), black_box(4));
            assert!(out.all_equal());
            out.pairs_checked
        })
    });
    group.finish();
}

criterion_group!(benches, bench_ground_sweep, bench_random_sweep);
criterion_main!(benches);
