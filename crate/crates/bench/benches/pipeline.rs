use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fractube_core::catalog;
use fractube_core::oracle::mc_parallel_area;
use fractube_core::tube::{default_strip, oscillation_amplitude};
use fractube_core::{
    build_tube_model, complex_dimensions, direct_tiling_volume, periodic_profile, tube_volume,
};

fn dims(c: &mut Criterion) {
    let sg = catalog::gasket().unwrap();
    let nl = catalog::half_third().unwrap();
    let dim = fractube_core::abscissa(&nl.system);
    c.bench_function("dims/gasket lattice im_max=1000", |b| {
        b.iter(|| complex_dimensions(&sg.system, 1.0, 1.6, black_box(1000.0)).unwrap())
    });
    c.bench_function("dims/half_third argument principle im_max=100", |b| {
        b.iter(|| complex_dimensions(&nl.system, dim - 0.25, dim, black_box(100.0)).unwrap())
    });
}

fn tube(c: &mut Criterion) {
    let sg = catalog::gasket().unwrap();
    let (lo, hi) = default_strip(&sg.system).unwrap();
    let p = sg.system.lattice().unwrap().oscillatory_period();
    let model = build_tube_model(&sg.system, &sg.generator, lo, hi, 2000.5 * p).unwrap();
    let g = sg.generator.inradius();
    c.bench_function("tube/gasket build m_max=2000", |b| {
        b.iter(|| {
            build_tube_model(&sg.system, &sg.generator, lo, hi, black_box(2000.5 * p)).unwrap()
        })
    });
    c.bench_function("tube/gasket evaluate", |b| {
        b.iter(|| tube_volume(&model, black_box(g / 100.0)).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let sg = catalog::gasket().unwrap();
    let nl = catalog::half_third().unwrap();
    let g = nl.generator.inradius();
    c.bench_function("oracle/half_third direct eps=g/1e4", |b| {
        b.iter(|| {
            direct_tiling_volume(&nl.system, &nl.generator, black_box(g * 1e-4), 100_000_000)
                .unwrap()
        })
    });
    let planar = sg.planar.as_ref().unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("gasket monte carlo 100k", |b| {
        b.iter(|| mc_parallel_area(planar, black_box(0.02), 100_000, 42).unwrap())
    });
    group.finish();
}

fn profile(c: &mut Criterion) {
    let sg = catalog::gasket().unwrap();
    let dim = fractube_core::abscissa(&sg.system);
    let model = build_tube_model(&sg.system, &sg.generator, dim - 1e-3, dim, 1.0).unwrap();
    let prof = periodic_profile(&model, 2000).unwrap();
    c.bench_function("profile/gasket coefficients m_max=2000", |b| {
        b.iter(|| periodic_profile(&model, black_box(2000)).unwrap())
    });
    let mut group = c.benchmark_group("profile");
    group.sample_size(10);
    group.bench_function("gasket amplitude grid", |b| {
        b.iter(|| oscillation_amplitude(black_box(&prof)))
    });
    group.finish();
}

criterion_group!(benches, dims, tube, oracle, profile);
criterion_main!(benches);
