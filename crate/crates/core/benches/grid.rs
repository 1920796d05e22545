use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sl2c_semigroup::kernels::{kernel_decomposition, qt_density};
use sl2c_semigroup::montecarlo::{simulate_paths, AreaSimSpec};
use sl2c_semigroup::{DensityGrid, Exec, GridSpec, SpectralPoint, TruncationPolicy};
use std::hint::black_box;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn qt_grid(c: &mut Criterion) {
    let policy = TruncationPolicy::default();
    let spec = GridSpec::new(-10.0, 10.0, 801).unwrap();
    let mut g = c.benchmark_group("qt_grid_801");
    for (name, exec) in EXECS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| DensityGrid::tabulate(&spec, exec, |xi| qt_density(black_box(1.0), xi, &policy)).unwrap())
        });
    }
    g.finish();
}

fn principal_grid(c: &mut Criterion) {
    let policy = TruncationPolicy::default();
    let spec = GridSpec::new(-10.0, 10.0, 401).unwrap();
    let d = kernel_decomposition(1.0, SpectralPoint::Principal(0.5), &policy).unwrap();
    let mut g = c.benchmark_group("principal_grid_401");
    g.sample_size(20);
    for (name, exec) in EXECS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| d.density_grid(&spec, exec).unwrap())
        });
    }
    g.finish();
}

fn area_paths(c: &mut Criterion) {
    let spec = AreaSimSpec {
        n_paths: 20_000,
        n_steps: 256,
        ..AreaSimSpec::default()
    };
    let mut g = c.benchmark_group("area_paths_20k");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| simulate_paths(&spec, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, qt_grid, principal_grid, area_paths);
criterion_main!(benches);
