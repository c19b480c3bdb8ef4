//! Event-driven Monte Carlo for the free-flight / wall-rebound dynamics.
//!
//! Each particle carries its own clock and rebound counter, so the mass in
//! generation n at time t is the weight of particles with exactly n wall
//! events by t.

mod fit;
mod grid;
mod laplace;
mod rng;
mod series;

use rayon::prelude::*;

pub use fit::{fit_decay_rate, DecayFit};
pub use grid::{bootstrap_l1, expected_l1_noise, l1_distance, Histogram, PhaseGrid};
pub use laplace::{laplace_functional, Estimate};
pub use rng::{stream, Stream};
pub use series::{run_series, Series, SeriesSpec, Violation};

use crate::error::{domain, Error, Result};
use crate::geometry::{Direction, Domain};
use crate::velocity::{sample_direction, InverseCdf, SpeedMeasure};
use crate::vec3::Vec3;
use crate::wall::Wall;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Full dynamics with wall resampling.
    Evolve,
    /// H = 0: particles die at their first wall hit.
    Absorbing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: u64,
    pub x: Vec3,
    pub v: Vec3,
    pub w: f64,
    pub rebounds: u32,
    /// Time the state (x, v) refers to.
    pub clock: f64,
    pub next_hit: f64,
    pub alive: bool,
}

/// Source of initial phase-space points.
pub trait PhaseSampler: Sync {
    fn sample(&self, index: u64, rng: &mut Stream) -> Result<(Vec3, Vec3)>;
}

/// Uniform position (optionally restricted to a half space through the
/// origin), isotropic direction, tabulated speed law.
#[derive(Debug, Clone)]
pub struct InteriorSampler {
    dom: Domain,
    speeds: InverseCdf,
    half: Option<Vec3>,
}

impl InteriorSampler {
    /// Speed density proportional to `h(rho)` with respect to d rho.
    pub fn new(dom: &Domain, speed: &SpeedMeasure, h: impl Fn(f64) -> f64) -> Result<Self> {
        let speeds = InverseCdf::new(speed.r0, speed.rmax, 4096, h)?;
        Ok(Self { dom: dom.clone(), speeds, half: None })
    }

    /// Normalized restriction of m(dv) dx.
    pub fn m_uniform(dom: &Domain, speed: &SpeedMeasure) -> Result<Self> {
        let d = speed.dim as i32;
        let w = speed.weight;
        Self::new(dom, speed, move |r| r.powi(d - 1) * w.eval(r))
    }

    /// Interior equilibrium of a constant-temperature Maxwell wall.
    pub fn maxwell(dom: &Domain, speed: &SpeedMeasure, theta: f64) -> Result<Self> {
        if !(theta > 0.0) {
            return domain("temperature must be positive");
        }
        let d = speed.dim as i32;
        let w = speed.weight;
        Self::new(dom, speed, move |r| r.powi(d - 1) * w.eval(r) * (-r * r / (2.0 * theta)).exp())
    }

    /// Keep only positions with x . normal <= 0.
    pub fn with_halfspace(mut self, normal: Vec3) -> Self {
        self.half = Some(normal);
        self
    }

    pub fn speed_cdf(&self, rho: f64) -> f64 {
        self.speeds.cdf(rho)
    }
}

impl PhaseSampler for InteriorSampler {
    fn sample(&self, _index: u64, rng: &mut Stream) -> Result<(Vec3, Vec3)> {
        let x = loop {
            let x = self.dom.sample_interior(rng);
            match self.half {
                Some(n) if x.dot(n) > 0.0 => continue,
                _ => break x,
            }
        };
        let rho = self.speeds.sample(rng);
        Ok((x, sample_direction(self.dom.dim(), rng) * rho))
    }
}

/// Fixed list of states, cycled by particle index.
#[derive(Debug, Clone)]
pub struct PointCloud(pub Vec<(Vec3, Vec3)>);

impl PhaseSampler for PointCloud {
    fn sample(&self, index: u64, _rng: &mut Stream) -> Result<(Vec3, Vec3)> {
        if self.0.is_empty() {
            return domain("empty point cloud");
        }
        Ok(self.0[(index % self.0.len() as u64) as usize])
    }
}

/// Moves single particles from wall event to wall event.
#[derive(Clone, Copy)]
pub struct Tracker<'a> {
    pub dom: &'a Domain,
    pub wall: &'a Wall,
    pub seed: u64,
    pub mode: Mode,
}

impl<'a> Tracker<'a> {
    pub fn new(wall: &'a Wall, seed: u64, mode: Mode) -> Self {
        Self { dom: wall.diffuse.domain(), wall, seed, mode }
    }

    /// Fresh particle at time 0 from `sampler`, using rebound stream 0.
    pub fn spawn(&self, sampler: &dyn PhaseSampler, id: u64, w: f64) -> Result<Particle> {
        let mut rng = stream(self.seed, id, 0);
        let (x, v) = sampler.sample(id, &mut rng)?;
        self.check_speed(v)?;
        if !self.dom.contains(x) {
            return domain(format!("initial position {x:?} outside the domain"));
        }
        let t = self.dom.exit_time(x, v, Direction::Forward)?;
        Ok(Particle { id, x, v, w, rebounds: 0, clock: 0.0, next_hit: t, alive: true })
    }

    fn check_speed(&self, v: Vec3) -> Result<()> {
        let s = &self.wall.diffuse.speed;
        let r = v.norm();
        if r < s.r0 * (1.0 - 1e-12) || r > s.rmax * (1.0 + 1e-12) {
            return Err(Error::Accounting(format!("speed {r} outside [{}, {}]", s.r0, s.rmax)));
        }
        Ok(())
    }

    /// Fly to the next wall hit, snap onto the boundary and resample (or die).
    pub fn hit(&self, p: &mut Particle) -> Result<()> {
        let raw = p.x + p.v * (p.next_hit - p.clock);
        let snapped = self.dom.project(raw);
        let miss = (snapped - raw).norm();
        if miss > 1e-9 * self.dom.diameter() {
            return Err(Error::Geometry(format!(
                "particle {} missed the wall by {miss:e} at t = {}",
                p.id, p.next_hit
            )));
        }
        p.x = snapped;
        p.clock = p.next_hit;
        p.rebounds += 1;
        match self.mode {
            Mode::Absorbing => {
                p.alive = false;
                p.next_hit = f64::INFINITY;
            }
            Mode::Evolve => {
                let mut rng = stream(self.seed, p.id, p.rebounds as u64);
                let (v, _) = self.wall.resample_outgoing(p.x, p.v, &mut rng);
                self.check_speed(v)?;
                p.v = v;
                p.next_hit = p.clock + self.dom.exit_time(p.x, v, Direction::Forward)?;
            }
        }
        Ok(())
    }

    /// Advance to `t`, calling `on_hit(rebound, time)` at every wall event.
    pub fn advance(&self, p: &mut Particle, t: f64, mut on_hit: impl FnMut(u32, f64)) -> Result<()> {
        if t < p.clock {
            return domain(format!("cannot advance particle {} backwards to {t}", p.id));
        }
        while p.alive && p.next_hit <= t {
            self.hit(p)?;
            on_hit(p.rebounds, p.clock);
        }
        if p.alive {
            p.x += p.v * (t - p.clock);
            p.clock = t;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationMass {
    pub t: f64,
    pub masses: Vec<f64>,
}

impl GenerationMass {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub particles: Vec<Particle>,
    pub seed: u64,
    pub time: f64,
    pub mode: Mode,
    /// Per-particle wall-event times, kept when logging is on.
    pub log: Option<Vec<Vec<f64>>>,
}

impl Ensemble {
    /// `n` particles of weight 1/n drawn from `sampler`.
    pub fn new(wall: &Wall, sampler: &dyn PhaseSampler, n: usize, seed: u64, mode: Mode) -> Result<Self> {
        if n == 0 {
            return domain("ensemble needs at least one particle");
        }
        let tr = Tracker::new(wall, seed, mode);
        let w = 1.0 / n as f64;
        let particles = (0..n as u64).into_par_iter().map(|i| tr.spawn(sampler, i, w)).collect::<Result<Vec<_>>>()?;
        Ok(Self { particles, seed, time: 0.0, mode, log: None })
    }

    pub fn with_log(mut self) -> Self {
        self.log = Some(vec![Vec::new(); self.particles.len()]);
        self
    }

    pub fn advance(&mut self, wall: &Wall, t_target: f64) -> Result<()> {
        if t_target < self.time {
            return domain(format!("t_target {t_target} precedes the ensemble time {}", self.time));
        }
        let tr = Tracker::new(wall, self.seed, self.mode);
        let first_err = match self.log.as_mut() {
            Some(log) => self
                .particles
                .par_iter_mut()
                .zip(log.par_iter_mut())
                .filter_map(|(p, l)| tr.advance(p, t_target, |_, t| l.push(t)).err().map(|e| (p.id, e)))
                .min_by_key(|(id, _)| *id),
            None => self
                .particles
                .par_iter_mut()
                .filter_map(|p| tr.advance(p, t_target, |_, _| {}).err().map(|e| (p.id, e)))
                .min_by_key(|(id, _)| *id),
        };
        if let Some((_, e)) = first_err {
            return Err(e);
        }
        self.time = t_target;
        Ok(())
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().filter(|p| p.alive).map(|p| p.w).sum()
    }

    pub fn alive(&self) -> usize {
        self.particles.iter().filter(|p| p.alive).count()
    }

    /// Weight per rebound generation at the current time.
    pub fn generation_masses(&self) -> GenerationMass {
        let top = self.particles.iter().filter(|p| p.alive).map(|p| p.rebounds as usize).max().unwrap_or(0);
        let mut masses = vec![0.0; top + 1];
        for p in self.particles.iter().filter(|p| p.alive) {
            masses[p.rebounds as usize] += p.w;
        }
        GenerationMass { t: self.time, masses }
    }

    pub fn histogram(&self, grid: &PhaseGrid) -> Result<Histogram> {
        grid.histogram(self.particles.iter().filter(|p| p.alive).map(|p| (p.x, p.v, p.w)))
    }
}
