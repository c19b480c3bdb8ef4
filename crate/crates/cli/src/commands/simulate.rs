//! Ensemble evolution with per-generation masses and the distance to
//! equilibrium.

use std::time::Instant;

use gapkin_core::spectral::Discretization;
use gapkin_core::transport::{expected_l1_noise, fit_decay_rate, l1_distance, run_series, DecayFit, Histogram, InteriorSampler, Series, SeriesSpec};
use gapkin_core::{InvariantDensity, Mode, PhaseGrid, PhaseSampler, Shape};

use crate::config::{config_err, InitialCfg, RunConfig};
use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

pub fn invariant_density(cfg: &RunConfig) -> anyhow::Result<InvariantDensity> {
    let wall = cfg.wall()?;
    if !wall.is_pure_diffuse() && !wall.diffuse.is_uniform_in_x() {
        return Err(config_err("the invariant density is only available for pure diffuse walls or x-independent kernels"));
    }
    let sp = &cfg.spectral;
    let disc = Discretization::new(&wall.diffuse, sp.boundary_nodes, sp.speed_nodes)?;
    Ok(InvariantDensity::new(disc, sp.power_tol, 100_000)?)
}

/// Cell masses of the equilibrium the ensemble should approach, when it is
/// computable on the grid.
pub fn equilibrium(cfg: &RunConfig, grid: &PhaseGrid, inv: Option<&InvariantDensity>) -> anyhow::Result<Option<Histogram>> {
    if cfg.mode() == Mode::Absorbing {
        return Ok(Some(grid.empty()));
    }
    let wall = cfg.wall()?;
    let k = &wall.diffuse;
    let dom = k.domain();
    if k.is_uniform_in_x() {
        // the emission profile itself, uniform in x and isotropic
        let theta = k.theta_at(dom.boundary_grid(4)?.points[0]);
        let sm = &k.speed;
        let d = sm.dim as i32;
        let s = InteriorSampler::new(dom, sm, |r| r.powi(d - 1) * sm.weight.eval(r) * k.profile_at(theta, r))?;
        return Ok(Some(grid.isotropic_masses(|r| s.speed_cdf(r))));
    }
    if dom.dim() == 2 && wall.is_pure_diffuse() {
        let owned;
        let inv = match inv {
            Some(i) => i,
            None => {
                owned = invariant_density(cfg)?;
                &owned
            }
        };
        return Ok(Some(grid.quadrature_masses(k.speed.weight, 3, |x, v| inv.eval(x, v).unwrap_or(0.0))?));
    }
    Ok(None)
}

pub struct SimOutput {
    pub series: Series,
    /// L1 distance to equilibrium and its noise floor per record time
    pub l1: Option<(Vec<f64>, Vec<f64>)>,
    pub fit: Option<anyhow::Result<DecayFit>>,
    /// the same fit on the grid with sector pairs merged, which must see
    /// the same slowest mode
    pub fit_merged: Option<anyhow::Result<DecayFit>>,
    pub csv: String,
}

pub fn simulate(ctx: &Ctx) -> anyhow::Result<SimOutput> {
    let cfg = &ctx.cfg;
    let wall = cfg.wall()?;
    let dom = wall.diffuse.domain();
    let inv = match cfg.sim.initial {
        InitialCfg::Invariant {} => Some(invariant_density(cfg)?),
        _ => None,
    };
    let simple = cfg.simple_sampler()?;
    let sampler: &dyn PhaseSampler = match (&simple, &inv) {
        (Some(s), _) => s.as_ref(),
        (None, Some(i)) => i,
        (None, None) => unreachable!("every initial state has a sampler"),
    };
    let grid = match dom.shape() {
        Shape::Ellipse { .. } => None,
        _ => Some(cfg.phase_grid()?),
    };
    let times = cfg.record_times();
    let spec = SeriesSpec {
        particles: cfg.sim.particles,
        seed: ctx.seed(),
        times: times.clone(),
        mode: cfg.mode(),
        gen_cap: cfg.sim.gen_cap,
        grid: grid.as_ref(),
    };
    let series = run_series(&wall, sampler, &spec)?;

    let eq = match &grid {
        Some(g) => equilibrium(cfg, g, inv.as_ref())?,
        None => None,
    };
    let distances = |merge: usize| -> anyhow::Result<Option<(Vec<f64>, Vec<f64>)>> {
        let (Some(g), Some(e)) = (&grid, &eq) else { return Ok(None) };
        let e = g.merge_sectors(e, merge)?;
        let floor = expected_l1_noise(&e.masses, cfg.sim.particles);
        let d = (0..times.len())
            .map(|i| l1_distance(&g.merge_sectors(&series.histogram(i, g)?, merge)?, &e))
            .collect::<gapkin_core::Result<Vec<f64>>>()?;
        Ok(Some((d, vec![floor; times.len()])))
    };
    let l1 = distances(1)?;
    let fit_on = |l: &Option<(Vec<f64>, Vec<f64>)>| -> anyhow::Result<Option<anyhow::Result<DecayFit>>> {
        match (cfg.sim.fit, l) {
            (Some(f), Some((d, floor))) => Ok(Some(fit_decay_rate(&times, d, (f.t_min, f.t_max), floor).map_err(Into::into))),
            (Some(_), None) => Err(config_err("sim.fit needs an equilibrium on a disk or ball phase grid")),
            _ => Ok(None),
        }
    };
    let fit = fit_on(&l1)?;
    let fit_merged = if fit.is_some() && cfg.sim.grid.sectors.is_multiple_of(2) && dom.dim() == 2 { fit_on(&distances(2)?)? } else { None };

    let cap = cfg.sim.gen_cap;
    let mut header: Vec<String> = vec!["t".into(), "total_mass".into()];
    header.extend((0..cap).map(|n| format!("gen{n}")));
    header.push(format!("gen{cap}_plus"));
    header.push("l1_to_equilibrium".into());
    header.push("l1_noise".into());
    let rows: Vec<Vec<String>> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut r = vec![num(t), num(series.total_mass(i))];
            r.extend(series.generation_masses(i).into_iter().map(num));
            match &l1 {
                Some((d, f)) => r.extend([num(d[i]), num(f[i])]),
                None => r.extend(["nan".to_string(), "nan".to_string()]),
            }
            r
        })
        .collect();
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = ctx.out.csv("simulate.csv", &h, &rows)?;
    Ok(SimOutput { series, l1, fit, fit_merged, csv })
}

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut rep = RunReport::new("simulate", &cfg.name, &ctx.out);
    rep.grid("particles", cfg.sim.particles);
    rep.grid("record_times", cfg.record_times().len());
    let t0 = Instant::now();
    let out = simulate(ctx)?;
    rep.time("simulate", t0);
    let s = &out.series;

    for v in &s.violations {
        eprintln!("rebound law violated: particle {} rebound {} at t = {} > {}", v.particle, v.rebound, v.time, v.bound);
    }
    rep.push(CheckRow::new(
        "rebound_law",
        s.violation_count as f64,
        0.0,
        true,
        format!("{} wall hits, k-th hit before k D / r0", s.hits),
    ));
    let fails = s.vanishing_failures();
    for (t, n, c) in fails.iter().take(16) {
        eprintln!("generation {n} still holds {c} particles at t = {t}");
    }
    rep.push(CheckRow::new("generation_vanishing", fails.len() as f64, 0.0, true, "U_n(t) = 0 for t >= (n+1) D / r0"));
    if let Some((d, _)) = &out.l1 {
        rep.grid("l1_final", d.last().copied().unwrap_or(f64::NAN));
    }
    match &out.fit {
        Some(Ok(f)) => {
            rep.grid("decay_rate", f.rate);
            rep.push(CheckRow::new("decay_fit", -f.rate, 0.0, f.rate > 0.0, format!("rate {:.6} from {} points", f.rate, f.points)));
        }
        Some(Err(e)) => rep.push(CheckRow::failed("decay_fit", e)),
        None => {}
    }
    if let (Some(Ok(a)), Some(b)) = (&out.fit, out.fit_merged) {
        match b {
            Ok(b) => rep.push(CheckRow::new(
                "decay_fit_merged_grid",
                (a.rate / b.rate - 1.0).abs(),
                ctx.tol("decay_fit_merged_grid", 0.25),
                true,
                format!("rate {:.6} with sector pairs merged", b.rate),
            )),
            Err(e) => rep.push(CheckRow::failed("decay_fit_merged_grid", &e)),
        }
    }
    Ok(rep)
}
