//! Spectral scan of lambda -> 1 in the spectrum of the boundary operator.

use std::time::Instant;

use gapkin_core::spectral::{complex_scan, lipschitz_threshold, real_scan, FourierSpectrum, RealScan, ScanRect, ScanSources, FULL_CAP};
use gapkin_core::wall::BetaConstants;
use gapkin_core::{Discretization, FullGrid, Shape, SpectralScan};

use crate::config::{config_err, RunConfig};
use crate::output::num;
use crate::report::{CheckRow, RunReport};
use crate::Ctx;

pub struct ScanOutput {
    pub scan: SpectralScan,
    pub real: Option<RealScan>,
    pub beta: BetaConstants,
    /// new re_min when the strip was cut back to -0.9 lambda_beta
    pub truncated: Option<f64>,
}

/// Full grid for partly diffuse scans; `shift` grows or shrinks the speed
/// and angle axes by a quarter.
pub fn full_grid(cfg: &RunConfig, shift: i32) -> anyhow::Result<FullGrid> {
    let sp = &cfg.spectral;
    let adj = |n: usize| match shift {
        s if s < 0 => n - n / 4,
        s if s > 0 => n + n / 4,
        _ => n,
    };
    Ok(FullGrid::new(&cfg.wall()?, sp.full_boundary_nodes, adj(sp.full_speed_nodes), adj(sp.direction_nodes), FULL_CAP)?)
}

pub fn scan_rect(cfg: &RunConfig, re_min: f64) -> ScanRect {
    let l = cfg.spectral.lambda;
    ScanRect { re_min, re_max: l.re_max, im_min: 0.0, im_max: l.im_max, resolution: l.resolution }
}

pub fn scan(cfg: &RunConfig) -> anyhow::Result<ScanOutput> {
    let wall = cfg.wall()?;
    let dom = wall.diffuse.domain();
    let beta = wall.beta_constants(&dom.boundary_grid(1024)?);
    let sp = &cfg.spectral;
    let r0 = wall.diffuse.speed.r0;
    if wall.is_pure_diffuse() {
        let rect = scan_rect(cfg, sp.lambda.re_min);
        let work = Discretization::new(&wall.diffuse, sp.boundary_nodes, sp.speed_nodes)?;
        let half = Discretization::new(&wall.diffuse, (sp.boundary_nodes / 2).max(4), (sp.speed_nodes / 2).max(1))?;
        let fine = Discretization::new(&wall.diffuse, 2 * sp.boundary_nodes, 2 * sp.speed_nodes)?;
        let src = ScanSources { work: &work, half: Some(&half), refined: Some(&fine) };
        let scan = complex_scan(&src, rect, lipschitz_threshold(&rect, dom.diameter(), r0))?;
        let n = ((rect.re_max - rect.re_min) * rect.resolution).round() as usize + 1;
        let real = real_scan(&work, rect.re_min, rect.re_max, n.max(2), sp.power_tol)?;
        return Ok(ScanOutput { scan, real: Some(real), beta, truncated: None });
    }
    if !beta.admissible {
        return Err(config_err(format!(
            "partly diffuse wall is not admissible: c_beta = {} >= 1 (osc beta = {}, sup beta = {})",
            beta.c_beta, beta.osc, beta.beta_inf
        )));
    }
    if !matches!(dom.shape(), Shape::Disk { .. }) || !wall.diffuse.is_uniform_in_x() {
        return Err(config_err("partly diffuse scans need a disk with an x-independent kernel and constant alpha"));
    }
    let depth = beta.lambda_beta.unwrap_or(f64::INFINITY);
    let mut re_min = sp.lambda.re_min;
    let mut truncated = None;
    if re_min < -0.9 * depth {
        re_min = -0.9 * depth;
        truncated = Some(re_min);
    }
    let rect = scan_rect(cfg, re_min);
    let (work, half, fine) = (full_grid(cfg, 0)?, full_grid(cfg, -1)?, full_grid(cfg, 1)?);
    let m = sp.fourier_modes;
    let (w, h, f) = (FourierSpectrum { grid: &work, m_max: m }, FourierSpectrum { grid: &half, m_max: m }, FourierSpectrum { grid: &fine, m_max: m });
    let src = ScanSources { work: &w, half: Some(&h), refined: Some(&f) };
    let scan = complex_scan(&src, rect, lipschitz_threshold(&rect, dom.diameter(), r0))?;
    Ok(ScanOutput { scan, real: None, beta, truncated })
}

pub fn roots_csv(scan: &SpectralScan) -> Vec<Vec<String>> {
    let opt = |x: Option<f64>| x.map_or("nan".to_string(), num);
    scan.roots
        .iter()
        .map(|r| {
            vec![
                num(r.lambda.re),
                num(r.lambda.im),
                num(r.residual),
                opt(r.refined.map(|z| z.re)),
                opt(r.refined.map(|z| z.im)),
                opt(r.delta),
                opt(r.estimate),
                r.stable.map_or("nan".to_string(), |s| s.to_string()),
            ]
        })
        .collect()
}

pub fn run(ctx: &Ctx) -> anyhow::Result<RunReport> {
    let cfg = &ctx.cfg;
    let mut rep = RunReport::new("spectrum", &cfg.name, &ctx.out);
    let t0 = Instant::now();
    let out = scan(cfg)?;
    rep.time("scan", t0);
    let s = &out.scan;
    if let Some(re) = out.truncated {
        println!("strip truncated to Re(lambda) >= {re} (0.9 lambda_beta)");
        rep.grid("re_min_truncated", re);
    }
    rep.grid("c_beta", out.beta.c_beta);
    rep.grid("step", s.rect.step());
    rep.grid("threshold", s.threshold);
    rep.grid("flagged", s.flagged.len());
    rep.grid("roots", s.roots.len());
    rep.grid("gap", s.gap.map_or("none".into(), |g| g.to_string()));
    rep.grid("gap_delta", s.gap_delta.map_or("none".into(), |g| g.to_string()));

    let field: Vec<Vec<String>> = s.field.iter().map(|c| vec![num(c.lambda.re), num(c.lambda.im), num(c.value)]).collect();
    ctx.out.csv("spectrum_field.csv", &["re", "im", "value"], &field)?;
    ctx.out.csv(
        "spectrum_roots.csv",
        &["re", "im", "residual", "refined_re", "refined_im", "delta", "estimate", "stable"],
        &roots_csv(s),
    )?;
    if let Some(r) = &out.real {
        let rows: Vec<Vec<String>> = r.points.iter().map(|&(l, v)| vec![num(l), num(v)]).collect();
        ctx.out.csv("spectrum_real.csv", &["lambda", "r"], &rows)?;
        rep.grid("real_roots", format!("{:?}", r.roots));
    }

    let zero = s.roots.iter().map(|r| r.lambda.norm()).fold(f64::INFINITY, f64::min);
    rep.push(CheckRow::new("root_at_zero", zero, ctx.tol("root_at_zero", s.rect.step()), true, "distance of the nearest root to 0").timed(t0));
    let unstable = s.roots.iter().filter(|r| r.stable == Some(false)).count();
    let detail = match (s.gap, s.gap_delta) {
        (Some(g), Some(d)) => format!("gap {g:.8} +- {d:.2e}"),
        (Some(g), None) => format!("gap {g:.8}"),
        _ => "no nonzero root in the rectangle".into(),
    };
    rep.push(CheckRow::new("roots_stable", unstable as f64, 0.0, true, detail).timed(t0));
    Ok(rep)
}
