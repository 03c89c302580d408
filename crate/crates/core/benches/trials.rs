use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spread_coloring::audit::{dense_edge_audit, spread_report, PipelineSampler, TestFamily};
use spread_coloring::graph::gen_random_regular;
use spread_coloring::matching::DenseParams;
use spread_coloring::thresholds::{sparsification_scan, DEFAULT_COLORABILITY_CAP};
use spread_coloring::{Execution, PipelineParams, SpreadColorer};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bench_spread_report(c: &mut Criterion) {
    let g = gen_random_regular(100, 12, 1).unwrap();
    let sampler = PipelineSampler::new(SpreadColorer::new(&g, PipelineParams::default(), 1).unwrap());
    let family = TestFamily::default_for(100);
    let mut group = c.benchmark_group("spread_report");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 1000), &exec, |b, &exec| {
            b.iter(|| spread_report(&sampler, &family, black_box(1000), 3, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_sparsification(c: &mut Criterion) {
    let g = gen_random_regular(100, 20, 2).unwrap();
    let ks = [2, 4, 8, 21];
    let mut group = c.benchmark_group("sparsification_scan");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 100), &exec, |b, &exec| {
            b.iter(|| sparsification_scan(&g, &ks, black_box(100), 5, DEFAULT_COLORABILITY_CAP, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_dense_matching(c: &mut Criterion) {
    let params = DenseParams::default();
    let mut group = c.benchmark_group("dense_edge_audit");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, 500), &exec, |b, &exec| {
            b.iter(|| dense_edge_audit(100, black_box(500), 7, &params, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_spread_report, bench_sparsification, bench_dense_matching);
criterion_main!(benches);
