//! Diffuse and partly diffuse wall models.

use rand::Rng;

use crate::error::{domain, finite, Error, Result};
use crate::geometry::{BoundaryGrid, Domain};
use crate::quad::Rule;
use crate::velocity::{kappa, sample_cosine_direction, InverseCdf, SpeedMeasure};
use crate::vec3::Vec3;

const GAMMA_FLOOR: f64 = 1e-12;

/// A scalar boundary field: constant, or equally spaced samples along arc
/// length with periodic linear interpolation (planar domains only).
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryField {
    Constant(f64),
    Samples(Vec<f64>),
}

impl BoundaryField {
    pub fn eval(&self, dom: &Domain, x: Vec3) -> f64 {
        match self {
            BoundaryField::Constant(c) => *c,
            BoundaryField::Samples(s) => {
                let n = s.len();
                let u = dom.arc_of(x) / dom.boundary_measure() * n as f64;
                let k = (u.floor() as usize) % n;
                let t = u - u.floor();
                s[k] * (1.0 - t) + s[(k + 1) % n] * t
            }
        }
    }

    pub fn min(&self) -> f64 {
        match self {
            BoundaryField::Constant(c) => *c,
            BoundaryField::Samples(s) => s.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            BoundaryField::Constant(c) => *c,
            BoundaryField::Samples(s) => s.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest jump between neighbouring samples.
    pub fn max_jump(&self) -> f64 {
        match self {
            BoundaryField::Constant(_) => 0.0,
            BoundaryField::Samples(s) => (0..s.len()).map(|i| (s[(i + 1) % s.len()] - s[i]).abs()).fold(0.0, f64::max),
        }
    }

    fn check(&self, dom: &Domain, what: &str, lo: f64, hi: f64) -> Result<()> {
        if let BoundaryField::Samples(s) = self {
            if dom.dim() != 2 {
                return domain(format!("{what} samples are only supported on planar domains"));
            }
            if s.len() < 2 {
                return domain(format!("{what} needs at least two samples"));
            }
        }
        if !(self.min() >= lo && self.max() <= hi && self.min().is_finite() && self.max().is_finite()) {
            return domain(format!("{what} must lie in [{lo}, {hi}]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Wall Maxwellian (2 pi theta)^{-d/2} exp(-rho^2 / 2 theta).
    Maxwell { theta: BoundaryField },
    /// Constant emission profile.
    Uniform,
}

/// Isotropic diffuse kernel k(x, rho, rho') = G(x, rho) / gamma(x).
#[derive(Debug, Clone)]
pub struct DiffuseKernel {
    pub profile: Profile,
    pub speed: SpeedMeasure,
    dom: Domain,
    const_gamma: Option<f64>,
    theta_max: f64,
    table: InverseCdf,
}

impl DiffuseKernel {
    pub fn new(profile: Profile, speed: &SpeedMeasure, dom: &Domain, cdf_resolution: usize) -> Result<Self> {
        if speed.dim != dom.dim() {
            return domain("speed measure and domain dimensions differ");
        }
        let theta_max = match &profile {
            Profile::Maxwell { theta } => {
                theta.check(dom, "theta", f64::MIN_POSITIVE, f64::INFINITY)?;
                theta.max()
            }
            Profile::Uniform => 1.0,
        };
        let lo = match &profile {
            Profile::Maxwell { theta } => theta.min(),
            Profile::Uniform => 1.0,
        };
        gamma_for(&profile, speed, lo)?;
        let g_hi = gamma_for(&profile, speed, theta_max)?;
        let d = speed.dim as i32;
        let w = speed.weight;
        let prof = profile.clone();
        let table = InverseCdf::new(speed.r0, speed.rmax, cdf_resolution, |r| {
            r.powi(d) * w.eval(r) * profile_value(&prof, d as usize, theta_max, r)
        })?;
        let mut k = Self { profile, speed: speed.clone(), dom: dom.clone(), const_gamma: None, theta_max, table };
        if k.is_uniform_in_x() {
            k.const_gamma = Some(g_hi);
        }
        Ok(k)
    }

    /// True when the kernel does not depend on the boundary point.
    pub fn is_uniform_in_x(&self) -> bool {
        match &self.profile {
            Profile::Maxwell { theta } => matches!(theta, BoundaryField::Constant(_)),
            Profile::Uniform => true,
        }
    }

    /// The presets never depend on the incoming speed.
    pub fn depends_on_incoming(&self) -> bool {
        false
    }

    pub fn theta_at(&self, x: Vec3) -> f64 {
        match &self.profile {
            Profile::Maxwell { theta } => theta.eval(&self.dom, x),
            Profile::Uniform => 1.0,
        }
    }

    /// Unnormalized emission profile G at temperature `theta`.
    pub fn profile_at(&self, theta: f64, rho: f64) -> f64 {
        profile_value(&self.profile, self.speed.dim, theta, rho)
    }

    fn gamma_theta(&self, theta: f64) -> Result<f64> {
        gamma_for(&self.profile, &self.speed, theta)
    }

    /// gamma(x) = kappa_d int rho^d w(rho) G(x, rho) drho, on the radial rule.
    pub fn gamma(&self, x: Vec3) -> Result<f64> {
        match self.const_gamma {
            Some(g) => Ok(g),
            None => self.gamma_theta(self.theta_at(x)),
        }
    }

    /// Normalized kernel value; arguments must lie in the speed annulus.
    pub fn eval(&self, x: Vec3, rho: f64, rho_in: f64) -> Result<f64> {
        if !self.speed.contains(rho) || !self.speed.contains(rho_in) {
            return domain(format!("speeds ({rho}, {rho_in}) outside [{}, {}]", self.speed.r0, self.speed.rmax));
        }
        let th = self.theta_at(x);
        Ok(self.profile_at(th, rho) / self.gamma(x)?)
    }

    /// d/drho of the normalized kernel.
    pub fn deval(&self, x: Vec3, rho: f64) -> Result<f64> {
        let th = self.theta_at(x);
        let g = self.profile_at(th, rho) / self.gamma(x)?;
        Ok(match self.profile {
            Profile::Maxwell { .. } => -rho / th * g,
            Profile::Uniform => 0.0,
        })
    }

    /// Emitted speed with density proportional to k(x, rho) rho^d w(rho).
    pub fn sample_speed<R: Rng + ?Sized>(&self, x: Vec3, rng: &mut R) -> f64 {
        if self.is_uniform_in_x() {
            return self.table.sample(rng);
        }
        let th = self.theta_at(x);
        // the table is built at the hottest temperature; thin it down
        let c = 0.5 * (1.0 / th - 1.0 / self.theta_max);
        let r0 = self.speed.r0;
        loop {
            let rho = self.table.sample(rng);
            if rng.random::<f64>() < (-(rho * rho - r0 * r0) * c).exp() {
                return rho;
            }
        }
    }

    pub fn emission_table(&self) -> &InverseCdf {
        &self.table
    }

    /// Quadrature of int k |v.n| m(dv) over the emission half space at `x`.
    pub fn normalization(&self, x: Vec3) -> Result<f64> {
        let d = self.speed.dim;
        let r = &self.speed.radial;
        let mut s = 0.0;
        for (&rho, &q) in r.nodes.iter().zip(&r.weights) {
            s += q * rho.powi(d as i32) * self.speed.weight.eval(rho) * self.eval(x, rho, rho)?;
        }
        finite(kappa(d) * s, "normalization")
    }

    pub fn domain(&self) -> &Domain {
        &self.dom
    }
}

fn gamma_for(profile: &Profile, speed: &SpeedMeasure, theta: f64) -> Result<f64> {
    let d = speed.dim;
    let r = &speed.radial;
    let g = kappa(d)
        * r.nodes
            .iter()
            .zip(&r.weights)
            .map(|(&rho, &q)| q * rho.powi(d as i32) * speed.weight.eval(rho) * profile_value(profile, d, theta, rho))
            .sum::<f64>();
    if !(g > GAMMA_FLOOR) || !g.is_finite() {
        return Err(Error::DegenerateKernel(format!("gamma = {g:e} at theta = {theta}")));
    }
    Ok(g)
}

fn profile_value(p: &Profile, dim: usize, theta: f64, rho: f64) -> f64 {
    match p {
        Profile::Maxwell { .. } => {
            (2.0 * std::f64::consts::PI * theta).powf(-(dim as f64) / 2.0) * (-rho * rho / (2.0 * theta)).exp()
        }
        Profile::Uniform => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub pass: bool,
}

/// Numeric version of the integrability conditions on the truncated measure.
///
/// Tail conditions cannot be tested at infinity, so each integral is also
/// evaluated on [r0, 2R0] and [r0, 4R0] with the profile extended; the
/// condition fails when the increments do not shrink.
pub fn validate_kernel_conditions(kernel: &DiffuseKernel) -> Result<Vec<Check>> {
    let sm = &kernel.speed;
    let d = sm.dim as i32;
    let w = sm.weight;
    let grid = kernel.dom.boundary_grid(if kernel.is_uniform_in_x() { 4 } else { 64 })?;
    let mut out = Vec::new();

    let mut sup_k_r0: f64 = 0.0;
    let mut sup_k: f64 = 0.0;
    let mut tail = [0.0f64; 3];
    let mut mixed = [0.0f64; 3];
    let mut deriv: f64 = 0.0;
    for &y in &grid.points {
        let th = kernel.theta_at(y);
        let gam = kernel.gamma(y)?;
        let k = |r: f64| kernel.profile_at(th, r) / gam;
        let dk = |r: f64| match kernel.profile {
            Profile::Maxwell { .. } => -r / th * k(r),
            Profile::Uniform => 0.0,
        };
        sup_k_r0 = sup_k_r0.max(k(sm.r0));
        let rule = Rule::composite(sm.r0, sm.rmax, 16, 16);
        sup_k = sup_k.max(rule.nodes.iter().map(|&r| k(r)).fold(0.0, f64::max));
        for (i, f) in [1.0, 2.0, 4.0].iter().enumerate() {
            let top = sm.rmax * f;
            tail[i] = tail[i].max(top.powi(d + 2) * k(top) * k(top) * w.eval(top));
            let rule = Rule::composite(sm.r0, top, 64, 16);
            let m = rule.integrate(|r| {
                r.powi(d + 1) * (r * k(r) * w.derivative(r).abs() + r * w.eval(r) * dk(r).abs() + k(r) * w.eval(r))
            });
            mixed[i] = mixed[i].max(m);
            if i == 0 {
                // the presets ignore the incoming speed, so the second factor is zero
                let first = rule.integrate(|r| r.powi(d + 2) * w.eval(r) * k(r));
                let incoming_derivative = if kernel.depends_on_incoming() { f64::NAN } else { 0.0 };
                deriv = deriv.max(first * incoming_derivative);
            }
        }
    }
    let shrinking = |v: [f64; 3]| v.iter().all(|x| x.is_finite()) && (v[2] - v[1]) < (v[1] - v[0]).max(1e-300);
    let decaying = |v: [f64; 3]| v.iter().all(|x| x.is_finite()) && v[1] <= v[0] && v[2] <= v[1];
    let tail0 = tail[0] * sup_k;
    out.push(Check {
        name: "tail decay at Rmax".into(),
        value: tail0,
        pass: tail0.is_finite() && decaying(tail),
    });
    out.push(Check { name: "sup k(y, r0, .)".into(), value: sup_k_r0, pass: sup_k_r0.is_finite() });
    out.push(Check {
        name: "mixed moment integral".into(),
        value: mixed[0],
        pass: mixed[0].is_finite() && shrinking(mixed),
    });
    out.push(Check {
        name: "derivative product integral".into(),
        value: deriv,
        pass: deriv.is_finite(),
    });
    for c in &out {
        if !c.value.is_finite() {
            return Err(Error::Numeric(format!("non-finite value in check '{}'", c.name)));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reflection {
    Specular,
    BounceBack,
}

impl Reflection {
    /// Reflected velocity for an incoming `v` at a wall with outward normal `n`.
    pub fn apply(self, v: Vec3, n: Vec3) -> Vec3 {
        match self {
            Reflection::Specular => v - n * (2.0 * v.dot(n)),
            Reflection::BounceBack => -v,
        }
    }
}

/// alpha R + (1 - alpha) K.
#[derive(Debug, Clone)]
pub struct Wall {
    pub diffuse: DiffuseKernel,
    pub alpha: BoundaryField,
    pub reflection: Reflection,
}

/// What happened at a wall event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bounce {
    Diffuse,
    Reflected,
    /// Grazing incidence routed to the diffuse branch.
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaConstants {
    pub osc: f64,
    pub beta_inf: f64,
    pub c_beta: f64,
    /// `f64::INFINITY` when c_beta = 0, `None` when not admissible.
    pub lambda_beta: Option<f64>,
    pub admissible: bool,
}

impl Wall {
    pub fn new(diffuse: DiffuseKernel, alpha: BoundaryField, reflection: Reflection) -> Result<Self> {
        alpha.check(diffuse.domain(), "alpha", 0.0, 1.0)?;
        Ok(Self { diffuse, alpha, reflection })
    }

    pub fn pure_diffuse(diffuse: DiffuseKernel) -> Self {
        Self { diffuse, alpha: BoundaryField::Constant(0.0), reflection: Reflection::Specular }
    }

    pub fn is_pure_diffuse(&self) -> bool {
        self.alpha.max() == 0.0
    }

    /// New velocity after hitting the wall at `x` with incoming `v_in` (v_in.n > 0).
    pub fn resample_outgoing<R: Rng + ?Sized>(&self, x: Vec3, v_in: Vec3, rng: &mut R) -> (Vec3, Bounce) {
        let dom = self.diffuse.domain();
        let n = dom.normal(x);
        let dim = dom.dim();
        let speed = v_in.norm();
        if v_in.dot(n) < 1e-12 * speed {
            return (self.emit(x, n, dim, rng), Bounce::Tangential);
        }
        let a = self.alpha.eval(dom, x);
        if a > 0.0 && rng.random::<f64>() < a {
            return (self.reflection.apply(v_in, n), Bounce::Reflected);
        }
        (self.emit(x, n, dim, rng), Bounce::Diffuse)
    }

    fn emit<R: Rng + ?Sized>(&self, x: Vec3, n: Vec3, dim: usize, rng: &mut R) -> Vec3 {
        let rho = self.diffuse.sample_speed(x, rng);
        sample_cosine_direction(-n, dim, rng) * rho
    }

    /// c_beta = (1 + osc beta)^2 - sup(beta)^2 and the strip depth lambda_beta.
    pub fn beta_constants(&self, grid: &BoundaryGrid) -> BetaConstants {
        let dom = self.diffuse.domain();
        let betas: Vec<f64> = grid.points.iter().map(|&p| 1.0 - self.alpha.eval(dom, p)).collect();
        let hi = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = betas.iter().cloned().fold(f64::INFINITY, f64::min);
        beta_constants(hi - lo, hi, self.diffuse.speed.r0, dom.diameter())
    }
}

pub fn beta_constants(osc: f64, beta_inf: f64, r0: f64, diameter: f64) -> BetaConstants {
    let c = (1.0 + osc).powi(2) - beta_inf * beta_inf;
    let c = if c.abs() < 1e-15 { 0.0 } else { c };
    let admissible = c < 1.0;
    let lambda_beta = if !admissible {
        None
    } else if c <= 0.0 {
        Some(f64::INFINITY)
    } else {
        Some(-(r0 / (2.0 * diameter)) * c.ln())
    };
    BetaConstants { osc, beta_inf, c_beta: c, lambda_beta, admissible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::Weight;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(profile: Profile) -> DiffuseKernel {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
        DiffuseKernel::new(profile, &sm, &dom, 4096).unwrap()
    }

    fn maxwell(theta: f64) -> Profile {
        Profile::Maxwell { theta: BoundaryField::Constant(theta) }
    }

    #[test]
    fn gamma_maxwell_reference() {
        let k = setup(maxwell(1.0));
        // oracle: fine composite rule of (1/pi) int rho^2 exp(-rho^2/2)
        let oracle = Rule::composite(0.5, 3.0, 200, 10).integrate(|r| r * r * (-r * r / 2.0).exp()) / std::f64::consts::PI;
        let g = k.gamma(Vec3::xy(1.0, 0.0)).unwrap();
        assert!((g - oracle).abs() < 1e-13, "{g} {oracle}");
        assert!((g - 0.374946).abs() < 1e-6);
    }

    #[test]
    fn uniform_closed_form() {
        let k = setup(Profile::Uniform);
        let want = 3.0 / (2.0 * (27.0 - 0.125));
        assert!((k.eval(Vec3::xy(0.0, 1.0), 1.0, 2.0).unwrap() - want).abs() < 1e-14);
        assert!((k.gamma(Vec3::xy(0.0, 1.0)).unwrap() - 2.0 * (27.0 - 0.125) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_and_incoming_independence() {
        let k = setup(maxwell(1.0));
        let x = Vec3::xy(0.0, -1.0);
        assert!((k.normalization(x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(k.eval(x, 1.2, 0.7).unwrap(), k.eval(x, 1.2, 2.9).unwrap());
        assert!(k.eval(x, 3.5, 1.0).is_err());
    }

    #[test]
    fn two_temperature_normalization() {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
        let th = BoundaryField::Samples(vec![1.0, 1.0, 2.0, 2.0]);
        let k = DiffuseKernel::new(Profile::Maxwell { theta: th }, &sm, &dom, 4096).unwrap();
        let g = dom.boundary_grid(37).unwrap();
        for &p in &g.points {
            assert!((k.normalization(p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_gamma_is_rejected() {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(20.0, 30.0, Weight::Power { m: 0.0 }, 2, 16, 16).unwrap();
        let r = DiffuseKernel::new(maxwell(0.01), &sm, &dom, 64);
        assert!(matches!(r, Err(Error::DegenerateKernel(_))));
    }

    #[test]
    fn assumption_checks() {
        let all_pass = |k: &DiffuseKernel| validate_kernel_conditions(k).unwrap().iter().all(|c| c.pass);
        assert!(all_pass(&setup(maxwell(1.0))));
        let dom = Domain::disk(1.0).unwrap();
        let good = SpeedMeasure::new(0.5, 3.0, Weight::GaussianGrowth { beta: 0.3 }, 2, 64, 64).unwrap();
        assert!(all_pass(&DiffuseKernel::new(maxwell(1.0), &good, &dom, 512).unwrap()));
        let bad = SpeedMeasure::new(0.5, 3.0, Weight::GaussianGrowth { beta: 0.5 }, 2, 64, 64).unwrap();
        let checks = validate_kernel_conditions(&DiffuseKernel::new(maxwell(1.0), &bad, &dom, 512).unwrap()).unwrap();
        assert!(!checks[2].pass);
    }

    #[test]
    fn reflections_preserve_speed() {
        let n = Vec3::xy(0.6, 0.8);
        let v = Vec3::xy(1.0, 0.5);
        for r in [Reflection::Specular, Reflection::BounceBack] {
            let w = r.apply(v, n);
            assert!((w.norm() - v.norm()).abs() < 1e-15);
            assert!(w.dot(n) < 0.0);
        }
        let w = Reflection::Specular.apply(v, n);
        assert!((Reflection::Specular.apply(w, n) - v).norm() < 1e-15);
    }

    #[test]
    fn partly_diffuse_branches() {
        let k = setup(maxwell(1.0));
        let wall = Wall::new(k, BoundaryField::Constant(1.0), Reflection::Specular).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Vec3::xy(1.0, 0.0);
        let v = Vec3::xy(1.0, 0.4);
        let (o, b) = wall.resample_outgoing(x, v, &mut rng);
        assert_eq!(b, Bounce::Reflected);
        assert_eq!(o, v - Vec3::xy(2.0, 0.0));
        let (o, b) = wall.resample_outgoing(x, Vec3::xy(0.0, 1.0), &mut rng);
        assert_eq!(b, Bounce::Tangential);
        assert!(o.x < 0.0);
    }

    #[test]
    fn beta_examples() {
        let c = beta_constants(0.0, 1.0, 0.5, 2.0);
        assert_eq!(c.c_beta, 0.0);
        assert_eq!(c.lambda_beta, Some(f64::INFINITY));
        let c = beta_constants(0.0, 0.5, 0.5, 2.0);
        assert_eq!(c.c_beta, 0.75);
        assert!((c.lambda_beta.unwrap() - 0.0359603).abs() < 1e-7);
        let c = beta_constants(0.2, 0.6, 0.5, 2.0);
        assert!((c.c_beta - 1.08).abs() < 1e-12);
        assert!(!c.admissible);
    }
}
