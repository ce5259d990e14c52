use std::f64::consts::{PI, SQRT_2};
use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use so2deg::galerkin::GalerkinSystem;
use so2deg::{analyze, build_system, eigen_sym, linear_degree, search_orbit};
use so2deg::{AnalysisConfig, GalerkinConfig, ModelPotential, Potential, SymMatrix};

fn four_dim() -> ModelPotential {
    ModelPotential::new(SymMatrix::diag(&[3.5, -2.0, 0.0, -1.0 / (2.0 * SQRT_2)]), 1.0).unwrap()
}

fn sitnikov() -> ModelPotential {
    ModelPotential::new(SymMatrix::zeros(1), 0.25).unwrap()
}

fn certificates(c: &mut Criterion) {
    let spec = build_system(&four_dim(), 2.0 * PI).unwrap();
    let cfg = AnalysisConfig::default();
    c.bench_function("analyze four-dimensional model", |b| b.iter(|| analyze(black_box(&spec), &cfg).unwrap()));

    let mut g = c.benchmark_group("linear degree");
    for n in [2usize, 8, 32] {
        let d: Vec<f64> = (0..n).map(|i| 0.7 * i as f64 + 0.3).collect();
        let a = SymMatrix::diag(&d);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| linear_degree(&eigen_sym(black_box(a)).unwrap(), 20.0).unwrap())
        });
    }
    g.finish();
}

fn galerkin(c: &mut Criterion) {
    let m = four_dim();
    let pot: Arc<dyn Potential> = Arc::new(m.clone());
    let mut g = c.benchmark_group("galerkin n=4");
    for modes in [16usize, 64] {
        let sys = GalerkinSystem::new(pot.clone(), m.v_inf.clone(), 2.0 * PI, modes).unwrap();
        let x: Vec<f64> = (0..sys.len()).map(|i| 0.3 / (1.0 + i as f64)).collect();
        g.bench_with_input(BenchmarkId::new("gradient", modes), &x, |b, x| b.iter(|| sys.gradient(black_box(x)).unwrap()));
        g.bench_with_input(BenchmarkId::new("jacobian", modes), &x, |b, x| b.iter(|| sys.jacobian(black_box(x)).unwrap()));
    }
    g.finish();

    let spec = build_system(&sitnikov(), 2.0 * PI).unwrap();
    let cfg = GalerkinConfig::default();
    let mut g = c.benchmark_group("orbit search");
    g.sample_size(10);
    g.bench_function("Sitnikov mode 1", |b| b.iter(|| search_orbit(black_box(&spec), 1, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, certificates, galerkin);
criterion_main!(benches);
