//! Worked examples with independently derived values.

use std::f64::consts::PI;

use gapkin_core::spectral::truncated_kernel_norm;
use gapkin_core::wall::beta_constants;
use gapkin_core::{BoundaryField, Direction, Discretization, DiffuseKernel, Domain, Profile, SpeedMeasure, Vec3, Weight};
use num_complex::Complex64;

fn close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b}");
}

/// Bisection on |x + t v| - 1 for the unit disk.
fn bisect_exit(x: Vec3, v: Vec3) -> f64 {
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (x + v * mid).norm() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn exit_times_on_the_unit_disk() {
    let d = Domain::disk(1.0).unwrap();
    close(d.exit_time(Vec3::ZERO, Vec3::xy(1.0, 0.0), Direction::Forward).unwrap(), 1.0, 1e-14);
    let x = Vec3::xy(0.5, 0.0);
    close(d.exit_time(x, Vec3::xy(1.0, 0.0), Direction::Forward).unwrap(), 0.5, 1e-14);
    close(d.exit_time(x, Vec3::xy(1.0, 0.0), Direction::Backward).unwrap(), 1.5, 1e-14);
    let v = Vec3::xy(0.0, 2.0);
    let t = d.exit_time(x, v, Direction::Forward).unwrap();
    close(t, 0.4330127, 1e-7);
    close(t, bisect_exit(x, v), 1e-12);
    assert!(d.exit_time(x, Vec3::ZERO, Direction::Forward).is_err());
    assert!(d.exit_time(Vec3::xy(2.0, 0.0), v, Direction::Forward).is_err());
}

#[test]
fn jacobian_on_the_unit_circle() {
    let d = Domain::disk(1.0).unwrap();
    close(d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(-1.0, 0.0)).unwrap(), 0.5, 1e-14);
    close(d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(0.0, 1.0)).unwrap(), 2f64.sqrt() / 4.0, 1e-14);
    assert!(d.jacobian(Vec3::xy(1.0, 0.0), Vec3::xy(1.0, 0.0)).is_err());
}

#[test]
fn change_of_variables_examples() {
    let disk = Domain::disk(1.0).unwrap();
    let x = Vec3::xy(1.0, 0.0);
    let (l, r) = disk.change_of_variables_check(x, |_| 1.0).unwrap();
    close(l, 2.0, 1e-6);
    close(r, 2.0, 1e-6);
    let n = disk.normal(x);
    let (l, r) = disk.change_of_variables_check(x, |s| s.dot(n).abs()).unwrap();
    close(l, PI / 2.0, 1e-6);
    close(r, PI / 2.0, 1e-5);
    let ball = Domain::ball(1.0).unwrap();
    let (l, r) = ball.change_of_variables_check(Vec3::new(0.0, 0.0, 1.0), |_| 1.0).unwrap();
    close(l, PI, 1e-5);
    close(r, PI, 1e-5);
}

#[test]
fn flatness_constants() {
    close(Domain::disk(1.0).unwrap().flatness_constant(256, 1.0).unwrap().1, 0.5, 1e-6);
    close(Domain::disk(2.0).unwrap().flatness_constant(256, 1.0).unwrap().1, 0.25, 1e-6);
    let e = Domain::ellipse(2.0, 1.0).unwrap();
    let a = e.flatness_constant(256, 1.0).unwrap().1;
    let b = e.flatness_constant(512, 1.0).unwrap().1;
    assert!(a.is_finite() && (a / b - 1.0).abs() < 1e-2, "{a} {b}");
}

#[test]
fn polar_integral_of_speed_squared() {
    let sm = SpeedMeasure::new(0.5, 1.0, Weight::Power { m: 0.0 }, 2, 64, 128).unwrap();
    close(sm.polar_integrate(|v| v.norm2()).unwrap(), PI / 2.0 * (1.0 - 0.0625), 1e-8);
}

#[test]
fn maxwell_normalizer() {
    let dom = Domain::disk(1.0).unwrap();
    let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
    let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
    // (1/pi) int_{0.5}^{3} rho^2 e^{-rho^2/2} d rho, by composite Simpson
    let n = 20_000;
    let h = 2.5 / n as f64;
    let f = |r: f64| r * r * (-r * r / 2.0).exp();
    let mut s = f(0.5) + f(3.0);
    for i in 1..n {
        s += f(0.5 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let gamma_ref = s * h / 3.0 / PI;
    close(gamma_ref, 0.374946, 2e-6);
    close(k.gamma(Vec3::xy(1.0, 0.0)).unwrap(), gamma_ref, 1e-8);
    close(k.normalization(Vec3::xy(0.0, 1.0)).unwrap(), 1.0, 1e-8);
}

#[test]
fn partly_diffuse_constants() {
    let b = beta_constants(0.0, 0.5, 0.5, 2.0);
    assert_eq!(b.c_beta, 0.75);
    close(b.lambda_beta.unwrap(), 0.0359603, 1e-7);
    assert!(b.admissible);
    assert!(!beta_constants(0.2, 0.6, 0.5, 2.0).admissible);
    assert_eq!(beta_constants(0.0, 1.0, 0.5, 2.0).lambda_beta, Some(f64::INFINITY));
}

#[test]
fn stochastic_boundary_operator() {
    let dom = Domain::disk(1.0).unwrap();
    let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
    let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
    let disc = Discretization::new(&k, 64, 16).unwrap();
    close(disc.w_norm_l1(Complex64::new(0.0, 0.0)), 1.0, 1e-6);
    let lead = disc.leading(Complex64::new(0.0, 0.0), 1e-13, 10_000);
    assert!(lead.converged);
    close(lead.value.re, 1.0, 1e-8);
    let phase = lead.vector[0] / lead.vector[0].norm();
    assert!(lead.vector.iter().all(|z| (z / phase).re > 0.0));
}

#[test]
fn truncated_kernel_norm_scales_quadratically() {
    let dom = Domain::disk(1.0).unwrap();
    let a = truncated_kernel_norm(&dom, 0.2, 1.0, 128, 16).unwrap();
    let b = truncated_kernel_norm(&dom, 0.1, 1.0, 128, 16).unwrap();
    close(a / b, 4.0, 0.05);
}
