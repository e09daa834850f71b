use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use su2sigma::par;
use su2sigma::quadrature::QuadGrid;
use su2sigma::quantum::analysis::{gram, Basis};
use su2sigma::quantum::{psi, SpectralLabel};
use su2sigma::sigma_group::verify_group;
use su2sigma::SpaceConfig;

fn grid_sampling(c: &mut Criterion) {
    let cfg = SpaceConfig::default();
    let grid = QuadGrid::default_for(&cfg).unwrap();
    let f = psi(SpectralLabel::new(5, 3, -2).unwrap(), &cfg).unwrap();
    let mut g = c.benchmark_group("sample_psi_default_grid");
    g.bench_function("parallel", |b| b.iter(|| black_box(f.sample(&grid))));
    g.bench_function("sequential", |b| b.iter(|| par::sequentially(|| black_box(f.sample(&grid)))));
    g.finish();
}

fn gram_matrix(c: &mut Criterion) {
    let cfg = SpaceConfig::default();
    let basis = Basis::build(3, QuadGrid::default_for(&cfg).unwrap(), &cfg).unwrap();
    let mut g = c.benchmark_group("gram_n3");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(gram(&basis))));
    g.bench_function("sequential", |b| b.iter(|| par::sequentially(|| black_box(gram(&basis)))));
    g.finish();
}

fn group_suite(c: &mut Criterion) {
    let cfg = SpaceConfig::default();
    let mut g = c.benchmark_group("group_axioms_200");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| black_box(verify_group(200, 10, 1, &cfg).unwrap())));
    g.bench_function("sequential", |b| b.iter(|| par::sequentially(|| black_box(verify_group(200, 10, 1, &cfg).unwrap()))));
    g.finish();
}

criterion_group!(benches, grid_sampling, gram_matrix, group_suite);
criterion_main!(benches);
