use criterion::{criterion_group, criterion_main, Criterion};
use gapkin_core::transport::{run_series, InteriorSampler, SeriesSpec};
use gapkin_core::{BoundaryField, DiffuseKernel, Domain, Mode, Profile, SpeedMeasure, Wall, Weight};

fn series(c: &mut Criterion) {
    let dom = Domain::disk(1.0).unwrap();
    let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
    let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
    let wall = Wall::pure_diffuse(k);
    let sampler = InteriorSampler::m_uniform(&dom, &sm).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| i as f64).collect();
    let mut g = c.benchmark_group("run_series");
    g.sample_size(10);
    g.bench_function("disk/1e4x20", |b| {
        b.iter(|| {
            let spec = SeriesSpec { particles: 10_000, seed: 1, times: times.clone(), mode: Mode::Evolve, gen_cap: 6, grid: None };
            run_series(&wall, &sampler, &spec).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, series);
criterion_main!(benches);
