use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use necrostrip_bench::reference;
use necrostrip_core::elliptic::{build_grid, solve_nutrient_obstacle, solve_pressure};
use necrostrip_core::evolution::{evaluate_psi, GridConfig, PsiEvaluator};
use necrostrip_core::fourier::periodic_nodes;

fn elliptic(c: &mut Criterion) {
    let (p, fs) = reference();
    let (nx, ny) = (64, 128);
    let rho: Vec<f64> = periodic_nodes(nx).iter().map(|x| 1e-3 * x.cos()).collect();
    let grid = build_grid(nx, ny, &fs, &rho).unwrap();
    let mut group = c.benchmark_group("elliptic 64x128");
    group.sample_size(20);
    group.bench_function("nutrient obstacle", |b| {
        b.iter(|| solve_nutrient_obstacle(black_box(&grid), &p, &fs).unwrap())
    });
    let obstacle = solve_nutrient_obstacle(&grid, &p, &fs).unwrap();
    group.bench_function("pressure", |b| {
        b.iter(|| solve_pressure(black_box(&grid), &p, &fs, &obstacle, 1.0).unwrap())
    });
    group.finish();
}

fn psi(c: &mut Criterion) {
    let (p, fs) = reference();
    let grid = GridConfig { nx: 64, ny: 128 };
    let rho: Vec<f64> = periodic_nodes(grid.nx)
        .iter()
        .map(|x| 1e-3 * x.cos())
        .collect();
    let mut group = c.benchmark_group("surface flux 64x128");
    group.sample_size(20);
    group.bench_function("cold", |b| {
        b.iter(|| evaluate_psi(black_box(&rho), &p, &fs, 1.0, grid).unwrap())
    });
    let mut eval = PsiEvaluator::new(&p, &fs, 1.0, grid).unwrap();
    eval.evaluate(&rho).unwrap();
    group.bench_function("warm", |b| {
        b.iter(|| eval.evaluate(black_box(&rho)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, elliptic, psi);
criterion_main!(benches);
