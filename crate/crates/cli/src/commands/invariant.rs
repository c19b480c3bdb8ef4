//! Invariant density on the boundary grid.

use std::time::Instant;

use gapkin_core::InvariantDensity;

use super::simulate::invariant_density;
use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

/// Relative L1 distance of the grid table to the closed form
/// G(theta, |v|) / (|Omega| int G dm), for x-independent kernels.
pub fn closed_form_error(inv: &InvariantDensity) -> anyhow::Result<Option<f64>> {
    let disc = inv.discretization();
    let k = &disc.kernel;
    if !k.is_uniform_in_x() {
        return Ok(None);
    }
    let dom = k.domain();
    let theta = k.theta_at(disc.grid.points[0]);
    let mass = k.speed.polar_integrate(|v| k.profile_at(theta, v.norm()))? * dom.volume();
    let (mut num_, mut den) = (0.0, 0.0);
    for (i, rho, value) in inv.table() {
        let b = disc.speeds.nodes.iter().position(|&r| r == rho).expect("table speeds are grid speeds");
        let w = disc.grid.weights[i] * disc.speed_factor(b);
        let want = k.profile_at(theta, rho) / mass;
        num_ += w * (value - want).abs();
        den += w * want;
    }
    Ok(Some(num_ / den))
}

pub fn table_csv(inv: &InvariantDensity) -> Vec<Vec<String>> {
    let g = &inv.discretization().grid;
    inv.table()
        .into_iter()
        .map(|(i, rho, v)| {
            let p = g.points[i];
            vec![i.to_string(), num(p.x), num(p.y), num(p.z), num(rho), num(v)]
        })
        .collect()
}

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut rep = RunReport::new("invariant", &cfg.name, &ctx.out);
    rep.grid("boundary_nodes", cfg.spectral.boundary_nodes);
    rep.grid("speed_nodes", cfg.spectral.speed_nodes);
    let t0 = Instant::now();
    let inv = invariant_density(cfg)?;
    rep.time("perron", t0);
    ctx.out.csv("invariant.csv", &["node", "x", "y", "z", "speed", "value"], &table_csv(&inv))?;
    if let Some(w) = &inv.warning {
        eprintln!("warning: {w}");
    }
    rep.grid("iterations", inv.iterations);
    rep.push(
        CheckRow::new("perron_residual", inv.residual, ctx.tol("perron_residual", 1e-8), true, inv.warning.clone().unwrap_or_default())
            .timed(t0),
    );
    if let Some(e) = closed_form_error(&inv)? {
        rep.push(CheckRow::new("closed_form", e, ctx.tol("closed_form", 1e-6), true, "relative L1 error against G(theta, |v|)").timed(t0));
    }
    Ok(rep)
}
