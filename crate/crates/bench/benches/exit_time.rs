use criterion::{criterion_group, criterion_main, Criterion};
use gapkin_core::{Direction, Domain, Vec3};
use std::hint::black_box;

fn exit_time(c: &mut Criterion) {
    for (name, dom) in [("disk", Domain::disk(1.0).unwrap()), ("ellipse", Domain::ellipse(2.0, 1.0).unwrap()), ("ball", Domain::ball(1.0).unwrap())] {
        let x = Vec3::new(0.3, -0.2, if dom.dim() == 3 { 0.1 } else { 0.0 });
        let v = Vec3::new(0.7, 1.1, if dom.dim() == 3 { -0.4 } else { 0.0 });
        c.bench_function(&format!("exit_time/{name}"), |b| b.iter(|| dom.exit_time(black_box(x), black_box(v), Direction::Forward).unwrap()));
    }
}

criterion_group!(benches, exit_time);
criterion_main!(benches);
