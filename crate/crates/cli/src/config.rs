//! Run configuration: TOML schema, validation and conversion to core types.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use gapkin_core::transport::{InteriorSampler, PhaseGrid, PointCloud};
use gapkin_core::velocity::kappa;
use gapkin_core::{BoundaryField, DiffuseKernel, Domain, Mode, Profile, Reflection, SpeedMeasure, Vec3, Wall, Weight};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Marker for bad input; the binary maps it to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Wrap a core error raised while building objects from the config.
fn invalid<T>(r: gapkin_core::Result<T>, what: &str) -> anyhow::Result<T> {
    r.map_err(|e| config_err(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub domain: DomainCfg,
    pub velocity: VelocityCfg,
    pub wall: WallCfg,
    #[serde(default)]
    pub sim: SimCfg,
    #[serde(default)]
    pub spectral: SpectralCfg,
    #[serde(default)]
    pub acceptance: AcceptanceCfg,
}

fn default_name() -> String {
    "run".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainCfg {
    Disk {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Ball {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocityCfg {
    pub r0: f64,
    #[serde(rename = "Rmax")]
    pub rmax: f64,
    #[serde(default)]
    pub weight: WeightCfg,
    #[serde(default)]
    pub quad: QuadCfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightCfg {
    Power { m: f64 },
    StretchedExp { alpha: f64, s: f64 },
    GaussianGrowth { beta: f64 },
}

impl Default for WeightCfg {
    fn default() -> Self {
        WeightCfg::Power { m: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadCfg {
    pub radial: usize,
    pub angular: usize,
}

impl Default for QuadCfg {
    fn default() -> Self {
        Self { radial: 64, angular: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallType {
    Maxwell,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReflectionCfg {
    Specular,
    Bounceback,
}

/// A constant or samples equispaced in arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldCfg {
    Const(f64),
    Samples(Vec<f64>),
}

impl FieldCfg {
    fn field(&self) -> BoundaryField {
        match self {
            FieldCfg::Const(c) => BoundaryField::Constant(*c),
            FieldCfg::Samples(s) => BoundaryField::Samples(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallCfg {
    #[serde(rename = "type")]
    pub kind: WallType,
    #[serde(default = "one")]
    pub theta: FieldCfg,
    #[serde(default = "zero")]
    pub alpha: FieldCfg,
    #[serde(default = "specular")]
    pub reflection: ReflectionCfg,
}

fn one() -> FieldCfg {
    FieldCfg::Const(1.0)
}
fn zero() -> FieldCfg {
    FieldCfg::Const(0.0)
}
fn specular() -> ReflectionCfg {
    ReflectionCfg::Specular
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeCfg {
    Evolve,
    Absorbing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedLaw {
    /// the speed marginal of m(dv)
    Measure,
    Maxwell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialCfg {
    Uniform {
        #[serde(default = "measure")]
        speed: SpeedLaw,
        #[serde(default = "unit")]
        theta: f64,
        /// keep x . halfspace <= 0
        #[serde(default, skip_serializing_if = "Option::is_none")]
        halfspace: Option<Vec<f64>>,
    },
    Pointcloud {
        /// rows [x, y, vx, vy] or [x, y, z, vx, vy, vz]
        points: Vec<Vec<f64>>,
    },
    Invariant {},
}

fn measure() -> SpeedLaw {
    SpeedLaw::Measure
}
fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub radial: usize,
    pub mu: usize,
    pub sectors: usize,
    pub speed_bins: usize,
}

impl Default for GridCfg {
    fn default() -> Self {
        Self { radial: 4, mu: 4, sectors: 8, speed_bins: 6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitCfg {
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaplaceCfg {
    pub lambdas: Vec<f64>,
    pub generations: Vec<u32>,
    pub order: usize,
}

impl Default for LaplaceCfg {
    fn default() -> Self {
        Self { lambdas: vec![0.5, 1.0], generations: vec![0, 1], order: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimCfg {
    pub particles: u64,
    /// master seed for every random stream of the run
    pub seed: u64,
    pub t_end: f64,
    pub record_dt: f64,
    #[serde(default = "evolve")]
    pub mode: ModeCfg,
    #[serde(default = "uniform")]
    pub initial: InitialCfg,
    #[serde(default = "gen_cap")]
    pub gen_cap: usize,
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitCfg>,
    #[serde(default)]
    pub laplace: LaplaceCfg,
}

fn evolve() -> ModeCfg {
    ModeCfg::Evolve
}
fn uniform() -> InitialCfg {
    InitialCfg::Uniform { speed: SpeedLaw::Measure, theta: 1.0, halfspace: None }
}
fn gen_cap() -> usize {
    6
}

impl Default for SimCfg {
    fn default() -> Self {
        Self {
            particles: 100_000,
            seed: 1,
            t_end: 20.0,
            record_dt: 0.5,
            mode: ModeCfg::Evolve,
            initial: uniform(),
            gen_cap: gen_cap(),
            grid: GridCfg::default(),
            fit: None,
            laplace: LaplaceCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaCfg {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
    /// lattice points per unit length
    pub resolution: f64,
}

impl Default for LambdaCfg {
    fn default() -> Self {
        Self { re_min: -1.2, re_max: 0.2, im_max: 6.0, resolution: 20.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralCfg {
    pub boundary_nodes: usize,
    pub speed_nodes: usize,
    pub direction_nodes: usize,
    #[serde(default = "full_boundary")]
    pub full_boundary_nodes: usize,
    #[serde(default = "full_speed")]
    pub full_speed_nodes: usize,
    /// Fourier modes |m| <= fourier_modes in partly diffuse scans
    #[serde(default = "fourier_modes")]
    pub fourier_modes: i64,
    #[serde(default)]
    pub lambda: LambdaCfg,
    pub power_tol: f64,
}

fn full_boundary() -> usize {
    64
}
fn full_speed() -> usize {
    16
}
fn fourier_modes() -> i64 {
    16
}

impl Default for SpectralCfg {
    fn default() -> Self {
        Self {
            boundary_nodes: 256,
            speed_nodes: 48,
            direction_nodes: 16,
            full_boundary_nodes: full_boundary(),
            full_speed_nodes: full_speed(),
            fourier_modes: fourier_modes(),
            lambda: LambdaCfg::default(),
            power_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceCfg {
    /// per-check tolerance overrides, keyed by check name
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks that only need the config itself; building the core objects
    /// catches the rest.
    pub fn validate(&self) -> anyhow::Result<()> {
        let dom = self.domain()?;
        let dim = dom.dim();
        self.kernel()?;
        self.wall()?;
        let s = &self.sim;
        if s.particles == 0 {
            return Err(config_err("sim.particles must be positive"));
        }
        if !(s.t_end > 0.0 && s.record_dt > 0.0 && s.t_end.is_finite()) {
            return Err(config_err("sim.t_end and sim.record_dt must be positive"));
        }
        if s.t_end / s.record_dt > 1e6 {
            return Err(config_err("too many record times"));
        }
        if let Some(f) = s.fit {
            if !(f.t_min >= 0.0 && f.t_max > f.t_min) {
                return Err(config_err("sim.fit needs 0 <= t_min < t_max"));
            }
        }
        if let InitialCfg::Pointcloud { points } = &s.initial {
            if points.is_empty() || points.iter().any(|p| p.len() != 2 * dim) {
                return Err(config_err(format!("sim.initial.points rows need {} entries", 2 * dim)));
            }
        }
        if let InitialCfg::Uniform { halfspace: Some(h), theta, .. } = &s.initial {
            if h.len() != dim {
                return Err(config_err("sim.initial.halfspace has the wrong dimension"));
            }
            if !(*theta > 0.0) {
                return Err(config_err("sim.initial.theta must be positive"));
            }
        }
        if s.laplace.order == 0 || s.laplace.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(config_err("sim.laplace needs positive lambdas and order"));
        }
        let sp = &self.spectral;
        if sp.boundary_nodes < 4 || sp.speed_nodes == 0 || sp.direction_nodes < 2 || sp.full_boundary_nodes < 4 || sp.full_speed_nodes == 0 {
            return Err(config_err("spectral grid sizes too small"));
        }
        if !(sp.power_tol > 0.0 && sp.power_tol < 1.0) {
            return Err(config_err("spectral.power_tol must lie in (0, 1)"));
        }
        let l = sp.lambda;
        if !(l.resolution > 0.0 && l.re_min <= l.re_max && l.im_max >= 0.0) {
            return Err(config_err("spectral.lambda needs re_min <= re_max, im_max >= 0, resolution > 0"));
        }
        Ok(())
    }

    pub fn domain(&self) -> anyhow::Result<Domain> {
        let (dom, dim) = match self.domain {
            DomainCfg::Disk { radius, dim } => (Domain::disk(radius), dim.map(|d| (d, 2))),
            DomainCfg::Ellipse { a, b, dim } => (Domain::ellipse(a, b), dim.map(|d| (d, 2))),
            DomainCfg::Ball { radius, dim } => (Domain::ball(radius), dim.map(|d| (d, 3))),
        };
        if let Some((got, want)) = dim {
            if got != want {
                return Err(config_err(format!("domain.dim = {got} does not match the domain type")));
            }
        }
        invalid(dom, "domain")
    }

    pub fn speed_measure(&self) -> anyhow::Result<SpeedMeasure> {
        let v = &self.velocity;
        let w = match v.weight {
            WeightCfg::Power { m } => Weight::Power { m },
            WeightCfg::StretchedExp { alpha, s } => Weight::StretchedExp { alpha, s },
            WeightCfg::GaussianGrowth { beta } => Weight::GaussianGrowth { beta },
        };
        let dim = self.domain()?.dim();
        invalid(SpeedMeasure::new(v.r0, v.rmax, w, dim, v.quad.radial, v.quad.angular), "velocity")
    }

    pub fn kernel(&self) -> anyhow::Result<DiffuseKernel> {
        let profile = match self.wall.kind {
            WallType::Maxwell => Profile::Maxwell { theta: self.wall.theta.field() },
            WallType::Uniform => Profile::Uniform,
        };
        invalid(DiffuseKernel::new(profile, &self.speed_measure()?, &self.domain()?, 4096), "wall")
    }

    pub fn wall(&self) -> anyhow::Result<Wall> {
        let refl = match self.wall.reflection {
            ReflectionCfg::Specular => Reflection::Specular,
            ReflectionCfg::Bounceback => Reflection::BounceBack,
        };
        invalid(Wall::new(self.kernel()?, self.wall.alpha.field(), refl), "wall")
    }

    pub fn mode(&self) -> Mode {
        match self.sim.mode {
            ModeCfg::Evolve => Mode::Evolve,
            ModeCfg::Absorbing => Mode::Absorbing,
        }
    }

    pub fn record_times(&self) -> Vec<f64> {
        let n = (self.sim.t_end / self.sim.record_dt + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sim.record_dt).collect()
    }

    /// Sampler for the uniform and point-cloud initial states.
    pub fn simple_sampler(&self) -> anyhow::Result<Option<Box<dyn gapkin_core::PhaseSampler>>> {
        let dom = self.domain()?;
        let sm = self.speed_measure()?;
        Ok(match &self.sim.initial {
            InitialCfg::Uniform { speed, theta, halfspace } => {
                let s = match speed {
                    SpeedLaw::Measure => invalid(InteriorSampler::m_uniform(&dom, &sm), "sim.initial")?,
                    SpeedLaw::Maxwell => invalid(InteriorSampler::maxwell(&dom, &sm, *theta), "sim.initial")?,
                };
                let s = match halfspace {
                    Some(h) => s.with_halfspace(Vec3::new(h[0], h[1], h.get(2).copied().unwrap_or(0.0))),
                    None => s,
                };
                Some(Box::new(s))
            }
            InitialCfg::Pointcloud { points } => {
                let d = dom.dim();
                let mut pts = Vec::with_capacity(points.len());
                for p in points {
                    let (x, v) = if d == 2 {
                        (Vec3::xy(p[0], p[1]), Vec3::xy(p[2], p[3]))
                    } else {
                        (Vec3::new(p[0], p[1], p[2]), Vec3::new(p[3], p[4], p[5]))
                    };
                    if !dom.contains(x) || !sm.contains(v.norm()) {
                        return Err(config_err(format!("point {p:?} lies outside the phase space")));
                    }
                    pts.push((x, v));
                }
                Some(Box::new(PointCloud(pts)))
            }
            InitialCfg::Invariant {} => None,
        })
    }

    /// Histogram grid: equal-volume shells, mu bins, sectors (planar) and
    /// speed bins of equal width.
    pub fn phase_grid(&self) -> anyhow::Result<PhaseGrid> {
        let g = self.sim.grid;
        let sm = self.speed_measure()?;
        let dom = self.domain()?;
        let nb = g.speed_bins.max(1);
        let edges: Vec<f64> = (0..=nb).map(|k| sm.r0 + (sm.rmax - sm.r0) * k as f64 / nb as f64).collect();
        let sect = if dom.dim() == 2 { g.sectors } else { 1 };
        invalid(PhaseGrid::new(&dom, sm.weight, edges, g.radial, g.mu, sect), "sim.grid")
    }

    /// Canonical TOML of the resolved config.
    pub fn resolved(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        let d = Sha256::digest(self.resolved().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Diffuse-kernel mass constant kappa_d of the configured dimension.
    pub fn kappa(&self) -> anyhow::Result<f64> {
        Ok(kappa(self.domain()?.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MIN: &str = r#"
[domain]
type = "disk"
radius = 1.0

[velocity]
r0 = 0.5
Rmax = 3.0

[wall]
type = "maxwell"
theta = 1.0
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let c = RunConfig::parse(MIN).unwrap();
        assert_eq!(c.spectral.boundary_nodes, 256);
        assert_eq!(c.sim.mode, ModeCfg::Evolve);
        // round trip through the resolved form
        let again = RunConfig::parse(&c.resolved()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MIN.replace("radius = 1.0", "radius = 1.0\ncolour = 3");
        let e = RunConfig::parse(&bad).unwrap_err();
        assert!(e.downcast_ref::<ConfigError>().is_some());
        let bad = format!("{MIN}\n[extra]\nx = 1\n");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = MIN.replace("[wall]", "[wall]\nkernel = 1");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = MIN.replace("r0 = 0.5", "r0 = 5.0");
        assert!(RunConfig::parse(&bad).unwrap_err().downcast_ref::<ConfigError>().is_some());
        let bad = MIN.replace("radius = 1.0", "radius = 1.0\ndim = 3");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = MIN.replace("theta = 1.0", "theta = [1.0, -2.0]");
        assert!(RunConfig::parse(&bad).is_err());
    }

    #[test]
    fn sample_fields_and_sections() {
        let text = MIN.replace("theta = 1.0", "theta = [1.0, 1.0, 2.0, 2.0]\nalpha = 0.5\nreflection = \"bounceback\"")
            + "\n[sim]\nparticles = 10\nseed = 3\nt_end = 1.0\nrecord_dt = 0.25\ninitial = { type = \"uniform\", speed = \"maxwell\", halfspace = [1.0, 0.0] }\n";
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.record_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(!c.wall().unwrap().is_pure_diffuse());
        assert!(c.simple_sampler().unwrap().is_some());
    }
}
