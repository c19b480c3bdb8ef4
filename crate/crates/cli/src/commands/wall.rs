//! Kernel assumptions, normalization and the partly diffuse constants.

use std::time::Instant;

use gapkin_core::wall::validate_kernel_conditions;

use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let wall = ctx.cfg.wall()?;
    let k = &wall.diffuse;
    let dom = k.domain();
    let mut rep = RunReport::new("validate-wall", &ctx.cfg.name, &ctx.out);
    let t0 = Instant::now();

    let checks = validate_kernel_conditions(k)?;
    let mut rows = vec![];
    for c in &checks {
        rows.push(vec![c.name.clone(), num(c.value), c.pass.to_string()]);
        // divergent tail integrals report an infinite value
        rep.push(CheckRow::new(&c.name, c.value, f64::INFINITY, c.pass, "").timed(t0));
    }

    let probe = dom.boundary_grid(64)?;
    let mut worst: f64 = 0.0;
    for &x in &probe.points {
        worst = worst.max((k.normalization(x)? - 1.0).abs());
    }
    rows.push(vec!["normalization".into(), num(worst), (worst <= 1e-8).to_string()]);
    rep.push(CheckRow::new("normalization", worst, ctx.tol("normalization", 1e-8), true, "max |int k |v.n| m(dv) - 1|").timed(t0));

    let b = wall.beta_constants(&dom.boundary_grid(1024)?);
    rep.grid("c_beta", b.c_beta);
    rep.grid("lambda_beta", b.lambda_beta.map_or("none".into(), |l| l.to_string()));
    rep.grid("admissible", b.admissible);
    rows.push(vec!["c_beta".into(), num(b.c_beta), b.admissible.to_string()]);
    rows.push(vec!["lambda_beta".into(), num(b.lambda_beta.unwrap_or(f64::NAN)), b.admissible.to_string()]);
    println!("c_beta = {} lambda_beta = {:?} admissible = {}", b.c_beta, b.lambda_beta, b.admissible);
    ctx.out.csv("wall.csv", &["check", "value", "pass"], &rows)?;
    rep.time("validate", t0);
    Ok(rep)
}
