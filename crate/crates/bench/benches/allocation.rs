use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vcalloc::{allocate_multi_client, allocate_single_client, baseline_allocate, BaselineStrategy};
use vcalloc_bench::static_instance;

fn single_client(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_client");
    for tasks in [4, 32, 256] {
        let (clients, fund, model) = static_instance(1, tasks, 2.0);
        group.bench_with_input(
            BenchmarkId::from_parameter(tasks),
            &clients[0],
            |b, bundle| b.iter(|| allocate_single_client(black_box(bundle), fund, &model).unwrap()),
        );
    }
    group.finish();
}

fn multi_client(c: &mut Criterion) {
    let mut group = c.benchmark_group("multi_client");
    for (clients, tasks) in [(4, 4), (16, 8), (64, 16)] {
        let (bundles, fund, model) = static_instance(clients, tasks, 2.0);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{clients}x{tasks}")),
            &bundles,
            |b, bundles| {
                b.iter(|| allocate_multi_client(black_box(bundles), fund, &model).unwrap())
            },
        );
    }
    group.finish();
}

fn large_fund(c: &mut Criterion) {
    // many δ units per task exercises the bulk prefill of the greedy
    let mut group = c.benchmark_group("large_fund");
    for ratio in [2.0, 32.0, 512.0] {
        let (bundles, fund, model) = static_instance(8, 8, ratio);
        group.bench_with_input(
            BenchmarkId::from_parameter(ratio),
            &bundles,
            |b, bundles| {
                b.iter(|| allocate_multi_client(black_box(bundles), fund, &model).unwrap())
            },
        );
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let (bundles, fund, model) = static_instance(16, 8, 2.0);
    let mut group = c.benchmark_group("baseline");
    for s in BaselineStrategy::ALL {
        group.bench_function(s.name(), |b| {
            b.iter(|| baseline_allocate(s, black_box(&bundles), fund, &model).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_client, multi_client, large_fund, baselines);
criterion_main!(benches);
