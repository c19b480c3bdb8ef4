//! Monte Carlo generation functionals against single resolvent terms.

use std::time::Instant;

use gapkin_core::spectral::{resolvent_term, ChordQuadrature};
use gapkin_core::transport::laplace_functional;
use gapkin_core::{Discretization, InvariantDensity, PhaseSampler, Vec3};
use num_complex::Complex64;

use super::simulate::invariant_density;
use crate::config::{config_err, InitialCfg, RunConfig, SpeedLaw};
use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

/// Bounded test observable paired with every generation.
pub fn observable(x: Vec3, v: Vec3) -> f64 {
    1.0 + 0.5 * x.x + 0.2 * v.y
}

/// Unit-mass density of the configured initial law against dx m(dv).
pub enum InitialDensity {
    Closed(Box<dyn Fn(Vec3, Vec3) -> f64 + Sync>),
    Invariant(Box<InvariantDensity>),
}

impl InitialDensity {
    pub fn eval(&self, x: Vec3, v: Vec3) -> f64 {
        match self {
            InitialDensity::Closed(f) => f(x, v),
            InitialDensity::Invariant(i) => i.eval(x, v).unwrap_or(0.0),
        }
    }
}

pub fn initial_density(cfg: &RunConfig) -> anyhow::Result<InitialDensity> {
    let dom = cfg.domain()?;
    let sm = cfg.speed_measure()?;
    match &cfg.sim.initial {
        InitialCfg::Uniform { speed, theta, halfspace } => {
            let (th, speed) = (*theta, *speed);
            let shape = move |r: f64| match speed {
                SpeedLaw::Measure => 1.0,
                SpeedLaw::Maxwell => (-r * r / (2.0 * th)).exp(),
            };
            let vmass = sm.polar_integrate(|v| shape(v.norm()))?;
            let normal = halfspace.as_ref().map(|h| Vec3::new(h[0], h[1], h.get(2).copied().unwrap_or(0.0)));
            // the domains are centrally symmetric, so a half space through
            // the origin keeps half the volume
            let vol = dom.volume() * if normal.is_some() { 0.5 } else { 1.0 };
            let c = 1.0 / (vol * vmass);
            Ok(InitialDensity::Closed(Box::new(move |x, v| match normal {
                Some(n) if x.dot(n) > 0.0 => 0.0,
                _ => c * shape(v.norm()),
            })))
        }
        InitialCfg::Invariant {} => Ok(InitialDensity::Invariant(Box::new(invariant_density(cfg)?))),
        InitialCfg::Pointcloud { .. } => Err(config_err("laplace-check needs a uniform or invariant initial state")),
    }
}

pub struct LaplaceRow {
    pub lambda: f64,
    pub n: u32,
    pub mc: f64,
    pub stderr: f64,
    pub resolvent: f64,
}

impl LaplaceRow {
    pub fn rel_err(&self) -> f64 {
        (self.mc - self.resolvent).abs() / self.resolvent.abs()
    }
}

pub fn laplace_rows(ctx: &Ctx) -> anyhow::Result<Vec<LaplaceRow>> {
    let cfg = &ctx.cfg;
    let wall = cfg.wall()?;
    if !wall.is_pure_diffuse() {
        return Err(config_err("laplace-check needs a pure diffuse wall"));
    }
    let f = initial_density(cfg)?;
    let simple = cfg.simple_sampler()?;
    let sampler: &dyn PhaseSampler = match (&simple, &f) {
        (Some(s), _) => s.as_ref(),
        (None, InitialDensity::Invariant(i)) => i.as_ref(),
        (None, _) => unreachable!("closed densities come with a sampler"),
    };
    let sp = &cfg.spectral;
    let disc = Discretization::new(&wall.diffuse, sp.boundary_nodes, sp.speed_nodes)?;
    let lp = &cfg.sim.laplace;
    let fe = |x: Vec3, v: Vec3| f.eval(x, v);
    let mut rows = vec![];
    for &lambda in &lp.lambdas {
        for &n in &lp.generations {
            let est = laplace_functional(&wall, sampler, cfg.sim.particles, ctx.seed(), n, lambda, lp.order, &observable)?;
            let det = resolvent_term(&disc, n as usize, Complex64::new(lambda, 0.0), &fe, &observable, ChordQuadrature::default())?;
            rows.push(LaplaceRow { lambda, n, mc: est.mean, stderr: est.stderr, resolvent: det.re });
        }
    }
    Ok(rows)
}

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let mut rep = RunReport::new("laplace-check", &ctx.cfg.name, &ctx.out);
    rep.grid("particles", ctx.cfg.sim.particles);
    let t0 = Instant::now();
    let rows = laplace_rows(ctx)?;
    let csv: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.lambda), r.n.to_string(), num(r.mc), num(r.stderr), num(r.resolvent), num(r.rel_err())])
        .collect();
    ctx.out.csv("laplace.csv", &["lambda", "n", "monte_carlo", "stderr", "resolvent", "rel_err"], &csv)?;
    let worst = rows.iter().map(LaplaceRow::rel_err).fold(0.0, f64::max);
    rep.push(CheckRow::new("laplace_cross", worst, ctx.tol("laplace_cross", 0.05), !rows.is_empty(), format!("{} (lambda, n) pairs", rows.len())).timed(t0));
    Ok(rep)
}
