//! Hot-path benchmarks. The `parallel` feature (default) fans the outer
//! loops out through rayon; build with `--no-default-features` to measure
//! the sequential fallback:
//!
//!   cargo bench --bench hot_paths
//!   cargo bench --bench hot_paths --no-default-features

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mcr::exchange::{ExchangeKernel, PhaseFn};
use mcr::fock::FockSpace;
use mcr::model::DiscreteModel;
use mcr::pairings::field_moment;
use mcr::rng::SeededRng;
use mcr::tensor::Tensor;

fn setup() -> (ExchangeKernel, DiscreteModel) {
    let model = DiscreteModel::new(vec![0.0, 1.0, 2.5], 2, 2, 6).unwrap();
    let kernel = ExchangeKernel::two_component(
        PhaseFn::ExpSignDiff { alpha: 0.7 },
        PhaseFn::ExpSignDiff { alpha: -0.4 },
        &model,
    )
    .unwrap();
    (kernel, model)
}

fn bench_field_moment(c: &mut Criterion) {
    let (kernel, model) = setup();
    let mut rng = SeededRng::new(1);
    let d = model.one_particle_dim();
    let terms: Vec<(Vec<_>, Vec<_>)> = (0..6)
        .map(|_| (rng.complex_vector(d), rng.complex_vector(d)))
        .collect();
    let mode = if mcr::exec::parallel_enabled() {
        "par"
    } else {
        "seq"
    };
    c.bench_function(&format!("field_moment_len6_{mode}"), |b| {
        b.iter(|| field_moment(black_box(&kernel), &model, &terms).unwrap())
    });
}

fn bench_mcr_relations(c: &mut Criterion) {
    let (kernel, model) = setup();
    let model = model.with_truncation(3);
    let space = FockSpace::new(&kernel, &model).unwrap();
    let mode = if mcr::exec::parallel_enabled() {
        "par"
    } else {
        "seq"
    };
    c.bench_function(&format!("verify_mcr_{mode}"), |b| {
        b.iter(|| space.verify_mcr().unwrap())
    });
}

fn bench_ybe_scan(c: &mut Criterion) {
    let model = DiscreteModel::new(vec![0.0, 0.5, 1.0, 1.7, 2.5, 4.0], 8, 1, 2).unwrap();
    let kernel = ExchangeKernel::fused(
        PhaseFn::ExpSignDiff { alpha: 0.4 }.negated(),
        PhaseFn::ExpSignDiff { alpha: 0.9 }.negated(),
        3,
        &model,
    )
    .unwrap();
    let mode = if mcr::exec::parallel_enabled() {
        "par"
    } else {
        "seq"
    };
    c.bench_function(&format!("ybe_scan_r8_m6_{mode}"), |b| {
        b.iter(|| kernel.check_axioms(black_box(&model)).unwrap())
    });
}

fn bench_symmetrizer(c: &mut Criterion) {
    let (kernel, model) = setup();
    let space = FockSpace::new(&kernel, &model).unwrap();
    let d = space.one_particle_dim();
    let mut rng = SeededRng::new(2);
    let t = Tensor::from_vec(d, 4, rng.complex_vector(d.pow(4)));
    c.bench_function("symmetrize_p4", |b| {
        b.iter(|| space.symmetrize(black_box(&t)))
    });
}

criterion_group!(
    benches,
    bench_field_moment,
    bench_mcr_relations,
    bench_ybe_scan,
    bench_symmetrizer
);
criterion_main!(benches);
