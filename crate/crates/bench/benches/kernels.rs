use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eigcount::matrix::lu_factor;
use eigcount::{
    apply_filtered, count_eigs, factorize_nodes, gauss_legendre, sample_gaussian, ContourRule, CountConfig,
    ProjectorOptions, SearchConfig,
};
use eigcount_bench::{fixture, unit_disk};
use std::hint::black_box;

fn serial() -> ProjectorOptions {
    ProjectorOptions {
        threads: 1,
        ..Default::default()
    }
}

fn bench_quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("gauss_legendre");
    for q in [16, 64, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| gauss_legendre(black_box(q)).unwrap())
        });
    }
    g.finish();
}

fn bench_lu(c: &mut Criterion) {
    let mut g = c.benchmark_group("lu_factor");
    for n in [50, 200] {
        let (a, _) = fixture(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| lu_factor(black_box(a)).unwrap())
        });
    }
    g.finish();
}

fn bench_filter(c: &mut Criterion) {
    let (_, pencil) = fixture(200, 2);
    let rule = ContourRule::new(unit_disk(), 16).unwrap();
    let facts = factorize_nodes(&pencil, &rule, &serial()).unwrap();
    let y = sample_gaussian(200, 20, 0);
    c.bench_function("apply_filtered/n200_p20_q16", |b| {
        b.iter(|| apply_filtered(&facts, &pencil, black_box(&y)).unwrap())
    });
}

fn bench_count(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_eigs");
    g.sample_size(10);
    for n in [60, 200] {
        let (_, pencil) = fixture(n, 3);
        let cfg = CountConfig {
            search: SearchConfig {
                p: 10,
                ..Default::default()
            },
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::from_parameter(n), &pencil, |b, p| {
            b.iter(|| count_eigs(p, unit_disk(), &cfg, &serial()).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_quadrature, bench_lu, bench_filter, bench_count);
criterion_main!(benches);
