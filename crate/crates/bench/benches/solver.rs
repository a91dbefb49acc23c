use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::Vector3;

use lismodes::emkernel::assemble_coupling_matrix;
use lismodes::geometry::{build_mesh, Surface, Wave};
use lismodes::linkbudget::gain_exact;
use lismodes::modes::{mode_spectrum, SvdMethod};
use lismodes::waterfill;

fn desk_matrices(spacing_frac: f64) -> lismodes::CouplingMatrix {
    let wave = Wave::from_frequency(28e9).unwrap();
    let tx = Surface::xy_square(Vector3::zeros(), 0.05).unwrap();
    let rx = Surface::xy_square(Vector3::new(0.0, 0.0, 0.2), 0.05).unwrap();
    let spacing = wave.wavelength * spacing_frac;
    assemble_coupling_matrix(
        &build_mesh(&tx, spacing).unwrap(),
        &build_mesh(&rx, spacing).unwrap(),
        &wave,
    )
    .unwrap()
}

fn bench_assembly(c: &mut Criterion) {
    let wave = Wave::from_frequency(28e9).unwrap();
    let tx = Surface::xy_square(Vector3::zeros(), 0.05).unwrap();
    let rx = Surface::xy_square(Vector3::new(0.0, 0.0, 0.2), 0.05).unwrap();
    let mut group = c.benchmark_group("assembly");
    for frac in [0.5, 0.25] {
        let mt = build_mesh(&tx, wave.wavelength * frac).unwrap();
        let mr = build_mesh(&rx, wave.wavelength * frac).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("lambda_frac_{frac}")),
            &(mt, mr),
            |b, (mt, mr)| b.iter(|| assemble_coupling_matrix(mt, mr, &wave).unwrap()),
        );
    }
    group.finish();
}

fn bench_svd(c: &mut Criterion) {
    let k = desk_matrices(0.5);
    let mut group = c.benchmark_group("svd");
    group.sample_size(10);
    group.bench_function("exact", |b| {
        b.iter(|| mode_spectrum(&k, 32, SvdMethod::Exact, 0).unwrap())
    });
    group.bench_function("randomized", |b| {
        b.iter(|| mode_spectrum(&k, 32, SvdMethod::Randomized, 7).unwrap())
    });
    group.finish();
}

fn bench_quadrature(c: &mut Criterion) {
    let rx = Surface::xy_square(Vector3::new(0.0, 0.0, 1.0), 10.0).unwrap();
    c.bench_function("gain_exact_a10d", |b| {
        b.iter(|| gain_exact(&rx, &Vector3::zeros(), &Vector3::x(), 1e-4).unwrap())
    });
}

fn bench_waterfill(c: &mut Criterion) {
    let gains: Vec<f64> = (1..200).map(|i| 1.0 / i as f64).collect();
    c.bench_function("waterfill_200", |b| {
        b.iter(|| waterfill(&gains, 1.0, 10.0).unwrap())
    });
}

criterion_group!(
    benches,
    bench_assembly,
    bench_svd,
    bench_quadrature,
    bench_waterfill
);
criterion_main!(benches);
