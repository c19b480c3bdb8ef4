use criterion::{criterion_group, criterion_main, Criterion};
use gapkin_core::{BoundaryField, DiffuseKernel, Discretization, Domain, Profile, SpeedMeasure, Weight};
use num_complex::Complex64;
use std::hint::black_box;

fn w_apply(c: &mut Criterion) {
    let dom = Domain::disk(1.0).unwrap();
    let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
    let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
    let disc = Discretization::new(&k, 256, 48).unwrap();
    let u = vec![Complex64::new(1.0, 0.0); disc.len() * disc.speed_len()];
    let lam = Complex64::new(0.2, 1.0);
    c.bench_function("w_apply/256x48", |b| b.iter(|| disc.w_apply(black_box(lam), black_box(&u))));
    c.bench_function("w_norm_l1/256x48", |b| b.iter(|| disc.w_norm_l1(black_box(lam))));
}

criterion_group!(benches, w_apply);
criterion_main!(benches);
