//! Change-of-variables identity, flatness constant and travel-time bound.

use std::time::Instant;

use gapkin_core::transport::stream;
use gapkin_core::velocity::{kappa, sample_direction};
use gapkin_core::{Direction, Domain, Shape, Vec3};

use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

/// Test functions on the unit sphere; the first one is constant.
pub const TESTS: [(&str, fn(Vec3) -> f64); 6] = [
    ("one", |_| 1.0),
    ("sx2", |s| s.x * s.x),
    ("affine", |s| 1.0 + 0.5 * s.x - 0.25 * s.y),
    ("quadratic", |s| (s.x + 2.0 * s.y + s.z).powi(2)),
    ("exp", |s| (s.x - s.y).exp()),
    ("cubic", |s| (1.0 + s.y).powi(3) + s.z * s.z),
];

/// Boundary probe points: equispaced in arc length on planar domains, a
/// fixed spread on the sphere.
pub fn probe_points(dom: &Domain) -> Vec<Vec3> {
    if dom.dim() == 2 {
        let l = dom.boundary_measure();
        (0..6).map(|k| dom.point_at_arc(l * (k as f64 + 0.1) / 6.0)).collect()
    } else {
        [Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.5, 0.8)]
            .into_iter()
            .map(|p| dom.project(p.normalized()))
            .collect()
    }
}

pub struct CovRow {
    pub point: Vec3,
    pub test: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn cov_rows(dom: &Domain) -> anyhow::Result<Vec<CovRow>> {
    let mut rows = vec![];
    for x in probe_points(dom) {
        for (name, g) in TESTS {
            let (lhs, rhs) = dom.change_of_variables_check(x, g)?;
            rows.push(CovRow { point: x, test: name, lhs, rhs });
        }
    }
    Ok(rows)
}

/// Exact flatness constant of a round boundary, 1 / (2R).
pub fn round_flatness(dom: &Domain) -> Option<f64> {
    match dom.shape() {
        Shape::Disk { radius } | Shape::Ball { radius } => Some(0.5 / radius),
        Shape::Ellipse { .. } => None,
    }
}

/// max of t_+(x, v) |v| / D over random interior states.
pub fn travel_time_ratio(dom: &Domain, samples: u64, seed: u64) -> anyhow::Result<f64> {
    let mut worst: f64 = 0.0;
    let mut rng = stream(seed, u64::MAX, 0);
    for _ in 0..samples {
        let x = dom.sample_interior(&mut rng);
        let v = sample_direction(dom.dim(), &mut rng);
        for dir in [Direction::Forward, Direction::Backward] {
            let t = dom.exit_time(x, v, dir)?;
            if t < 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(t / dom.diameter());
        }
    }
    Ok(worst)
}

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let dom = ctx.cfg.domain()?;
    let mut rep = RunReport::new("geometry-check", &ctx.cfg.name, &ctx.out);
    rep.grid("dim", dom.dim());

    let t0 = Instant::now();
    let rows = cov_rows(&dom)?;
    let kap = kappa(dom.dim());
    let const_err = rows.iter().filter(|r| r.test == "one").map(|r| (r.rhs - kap).abs().max((r.lhs - kap).abs())).fold(0.0, f64::max);
    let fun_err = rows.iter().map(|r| (r.lhs - r.rhs).abs()).fold(0.0, f64::max);
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.point.x), num(r.point.y), num(r.point.z), r.test.to_string(), num(r.lhs), num(r.rhs), num((r.lhs - r.rhs).abs())])
        .collect();
    ctx.out.csv("change_of_variables.csv", &["x", "y", "z", "test", "lhs", "rhs", "abs_err"], &csv)?;
    let tol = ctx.tol("cov_constant", if dom.dim() == 2 { 1e-6 } else { 1e-5 });
    rep.push(CheckRow::new("cov_constant", const_err, tol, true, format!("kappa_d = {kap}")).timed(t0));
    rep.push(CheckRow::new("cov_functions", fun_err, ctx.tol("cov_functions", 1e-5), true, format!("{} point/function pairs", rows.len())).timed(t0));
    rep.time("change_of_variables", t0);

    let t0 = Instant::now();
    let (_, c) = dom.flatness_constant(256, 1.0)?;
    let row = match round_flatness(&dom) {
        Some(exact) => CheckRow::new("flatness", (c - exact).abs(), ctx.tol("flatness", 1e-6), true, format!("C = {c}, exact {exact}")),
        None => CheckRow::new("flatness", c, f64::INFINITY, c.is_finite() && c > 0.0, format!("C = {c}")),
    };
    rep.push(row.timed(t0));
    rep.time("flatness", t0);

    let t0 = Instant::now();
    let ratio = travel_time_ratio(&dom, 20_000, ctx.seed())?;
    rep.push(CheckRow::new("travel_time_bound", ratio, ctx.tol("travel_time_bound", 1.0 + 1e-12), true, "max t_pm |v| / D").timed(t0));
    Ok(rep)
}
