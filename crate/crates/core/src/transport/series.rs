//! Trajectory sweep with recording at fixed times.
//!
//! Every particle is run through all record times before the next one is
//! touched, so memory stays flat in the particle count. Tallies are integer
//! counts, which makes the parallel merge exact and thread-count independent.

use rayon::prelude::*;

use super::{PhaseGrid, PhaseSampler, Histogram, Mode, Tracker};
use crate::error::{domain, Result};
use crate::wall::Wall;

const CHUNK: u64 = 1024;
const KEEP_VIOLATIONS: usize = 16;

pub struct SeriesSpec<'a> {
    pub particles: u64,
    pub seed: u64,
    /// Increasing record times.
    pub times: Vec<f64>,
    pub mode: Mode,
    /// Generations 0..gen_cap are tallied separately, the rest in one slot.
    pub gen_cap: usize,
    pub grid: Option<&'a PhaseGrid>,
}

/// A wall hit later than the rebound law allows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub particle: u64,
    pub rebound: u32,
    pub time: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub times: Vec<f64>,
    pub particles: u64,
    pub gen_cap: usize,
    pub alive: Vec<u64>,
    /// [time][generation], length gen_cap + 1 per time.
    pub generations: Vec<Vec<u64>>,
    /// [time][cell], empty without a grid.
    pub cells: Vec<Vec<u64>>,
    /// Rebound-law step D / r0 used for the per-hit check.
    pub step: f64,
    pub violations: Vec<Violation>,
    pub violation_count: u64,
    pub hits: u64,
}

struct Acc {
    alive: Vec<u64>,
    gens: Vec<u64>,
    cells: Vec<u64>,
    viol: Vec<Violation>,
    nviol: u64,
    hits: u64,
}

impl Acc {
    fn new(nt: usize, ng: usize, nc: usize) -> Self {
        Self { alive: vec![0; nt], gens: vec![0; nt * ng], cells: vec![0; nt * nc], viol: vec![], nviol: 0, hits: 0 }
    }

    fn merge(mut self, o: Acc) -> Acc {
        for (a, b) in self.alive.iter_mut().zip(&o.alive) {
            *a += b;
        }
        for (a, b) in self.gens.iter_mut().zip(&o.gens) {
            *a += b;
        }
        for (a, b) in self.cells.iter_mut().zip(&o.cells) {
            *a += b;
        }
        self.viol.extend(o.viol);
        self.viol.sort_by_key(|v| (v.particle, v.rebound));
        self.viol.truncate(KEEP_VIOLATIONS);
        self.nviol += o.nviol;
        self.hits += o.hits;
        self
    }
}

pub fn run_series(wall: &Wall, sampler: &dyn PhaseSampler, spec: &SeriesSpec) -> Result<Series> {
    if spec.particles == 0 {
        return domain("series needs at least one particle");
    }
    if spec.times.windows(2).any(|w| !(w[1] > w[0])) || spec.times.first().is_some_and(|&t| t < 0.0) {
        return domain("record times must be nonnegative and increasing");
    }
    let tr = Tracker::new(wall, spec.seed, spec.mode);
    let step = tr.dom.diameter() / wall.diffuse.speed.r0;
    let nt = spec.times.len();
    let ng = spec.gen_cap + 1;
    let nc = spec.grid.map_or(0, |g| g.cells());
    let w = 1.0 / spec.particles as f64;
    let chunks = spec.particles.div_ceil(CHUNK);

    let acc = (0..chunks)
        .into_par_iter()
        .try_fold(
            || Acc::new(nt, ng, nc),
            |mut acc, c| -> Result<Acc> {
                let hi = ((c + 1) * CHUNK).min(spec.particles);
                for id in c * CHUNK..hi {
                    let mut p = tr.spawn(sampler, id, w)?;
                    for (i, &t) in spec.times.iter().enumerate() {
                        let (mut viol, mut nviol, mut hits) = (None, 0u64, 0u64);
                        tr.advance(&mut p, t, |k, at| {
                            hits += 1;
                            let bound = k as f64 * step;
                            if at > bound + 1e-9 {
                                nviol += 1;
                                viol.get_or_insert(Violation { particle: id, rebound: k, time: at, bound });
                            }
                        })?;
                        acc.hits += hits;
                        acc.nviol += nviol;
                        if let Some(v) = viol {
                            if acc.viol.len() < KEEP_VIOLATIONS {
                                acc.viol.push(v);
                            }
                        }
                        if !p.alive {
                            continue;
                        }
                        acc.alive[i] += 1;
                        acc.gens[i * ng + (p.rebounds as usize).min(spec.gen_cap)] += 1;
                        if let Some(g) = spec.grid {
                            acc.cells[i * nc + g.cell_of(p.x, p.v)?] += 1;
                        }
                    }
                }
                Ok(acc)
            },
        )
        .try_reduce(|| Acc::new(nt, ng, nc), |a, b| Ok(a.merge(b)))?;

    let mut viol = acc.viol;
    viol.sort_by_key(|v| (v.particle, v.rebound));
    viol.truncate(KEEP_VIOLATIONS);
    Ok(Series {
        times: spec.times.clone(),
        particles: spec.particles,
        gen_cap: spec.gen_cap,
        alive: acc.alive,
        generations: acc.gens.chunks(ng).map(|c| c.to_vec()).collect(),
        cells: if nc > 0 { acc.cells.chunks(nc).map(|c| c.to_vec()).collect() } else { vec![] },
        step,
        violations: viol,
        violation_count: acc.nviol,
        hits: acc.hits,
    })
}

impl Series {
    pub fn total_mass(&self, i: usize) -> f64 {
        self.alive[i] as f64 / self.particles as f64
    }

    pub fn generation_masses(&self, i: usize) -> Vec<f64> {
        self.generations[i].iter().map(|&c| c as f64 / self.particles as f64).collect()
    }

    pub fn histogram(&self, i: usize, grid: &PhaseGrid) -> Result<Histogram> {
        match self.cells.get(i) {
            Some(c) => grid.from_counts(c, self.particles),
            None => domain("series was recorded without a phase grid"),
        }
    }

    /// (time, generation, count) for every tallied generation n that still
    /// holds mass at a record time t >= (n + 1) D / r0.
    pub fn vanishing_failures(&self) -> Vec<(f64, usize, u64)> {
        let mut out = vec![];
        for (i, &t) in self.times.iter().enumerate() {
            for n in 0..self.gen_cap {
                if t >= (n + 1) as f64 * self.step && self.generations[i][n] > 0 {
                    out.push((t, n, self.generations[i][n]));
                }
            }
        }
        out
    }
}
