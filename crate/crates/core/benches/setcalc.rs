//! Sequential (one worker thread) against data-parallel (full pool) runs of
//! the hot kernels. Build with `--no-default-features` to measure the
//! sequential fallback code path itself.

use std::hint::black_box;

use approx_groups::entropy::{covering_number, MetricCloud, MetricGroup, Region};
use approx_groups::setcalc::{convolution, energy, power, product_set};
use approx_groups::{FiniteGroup, MSet};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let full = rayon::current_num_threads();
    vec![
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().num_threads(full).build().unwrap()),
    ]
}

fn bench_products(c: &mut Criterion) {
    let g = FiniteGroup::parse("sl2(13)").unwrap();
    let n = g.order() as u32;
    let a = MSet::new(&g, (0..n).step_by(7)).unwrap();
    let b = MSet::new(&g, (0..n).step_by(11)).unwrap();
    let mut group = c.benchmark_group("sl2(13)");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("product_set", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| product_set(black_box(&a), black_box(&b)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("convolution", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| convolution(black_box(&a), black_box(&b)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("energy", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| energy(black_box(&a), black_box(&b)).unwrap()))
        });
    }
    group.finish();

    let g = FiniteGroup::parse("cyclic(40000)").unwrap();
    let a = MSet::new(&g, 0..200).unwrap();
    let mut group = c.benchmark_group("cyclic(40000)");
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("power3", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| power(black_box(&a), 3).unwrap()))
        });
    }
    group.finish();
}

fn bench_entropy(c: &mut Criterion) {
    let q = MetricGroup::UnitQuaternions;
    let x = MetricCloud::random_in_region(&q, Region::Whole, 5_000, 3).unwrap();
    let grid: Vec<f64> = vec![0.1, 0.2, 0.4, 0.8];
    let mut group = c.benchmark_group("quaternions");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("entropy_report", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| approx_groups::entropy::entropy_report(black_box(&x), &grid).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("covering_number", name), &pool, |bch, pool| {
            bch.iter(|| pool.install(|| covering_number(black_box(&x), 0.1).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_products, bench_entropy);
criterion_main!(benches);
