use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use floquet_core::{
    fidelity_susceptibility, one_period_operator, DriveAssignment, DrivePreset, LatticeConfig,
    Propagator, PropagatorOptions, StateVector,
};

fn setup(l: usize) -> (LatticeConfig, DriveAssignment) {
    (
        LatticeConfig::in_field_units(l, 0.1).unwrap(),
        DriveAssignment::preset(DrivePreset::OddOmega1EvenOmega0, l, 2.0).unwrap(),
    )
}

fn step_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for l in [6, 8, 10] {
        let (cfg, drive) = setup(l);
        let prop = Propagator::new(&cfg, &drive, PropagatorOptions::default()).unwrap();
        let psi = StateVector::all_down(l).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, _| {
            b.iter(|| prop.step(black_box(&psi), 0.3, 1e-3).unwrap())
        });
    }
    group.finish();
}

fn one_period_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_period");
    group.sample_size(10);
    for l in [6, 8] {
        let (cfg, drive) = setup(l);
        let opts = PropagatorOptions::default();
        group.bench_with_input(BenchmarkId::from_parameter(l), &l, |b, _| {
            b.iter(|| one_period_operator(black_box(&cfg), &drive, &opts).unwrap())
        });
    }
    group.finish();
}

fn susceptibility_point(c: &mut Criterion) {
    let (cfg, drive) = setup(3);
    let opts = PropagatorOptions::with_dt(0.01);
    c.bench_function("chi_f_point_L3_t50", |b| {
        b.iter(|| fidelity_susceptibility(&cfg, &drive, black_box(4.0), 50.0, 1e-3, &opts).unwrap())
    });
}

criterion_group!(benches, step_kernel, one_period_build, susceptibility_point);
criterion_main!(benches);
