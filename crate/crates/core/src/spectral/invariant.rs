//! Invariant density of the stochastic boundary dynamics.
//!
//! The Perron vector phi of B(0) gives the fixed point u = k phi of W(0);
//! the interior density is its backward lift
//! Psi_H(x, v) = k(y, |v|) phi(y) / Z with y = x - t_-(x, v) v.
//! Off the grid, phi is interpolated.

use num_complex::Complex64;

use super::full::trig_weights;
use super::Discretization;
use crate::error::{domain, Error, Result};
use crate::geometry::Direction;
use crate::transport::{PhaseSampler, Stream};
use crate::vec3::Vec3;
use crate::velocity::{hemisphere_rule, sample_direction, InverseCdf};
use crate::wall::Profile;

/// Angular order of the chord-length integrals in the normalization.
const CHORD_ORDER: usize = 64;

#[derive(Debug, Clone)]
pub struct InvariantDensity {
    disc: Discretization,
    /// Perron vector scaled so that Psi_H has unit mass
    phi: Vec<f64>,
    /// ||u - W(0) u||_1 / ||u||_1
    pub residual: f64,
    pub iterations: usize,
    /// Set when the power iteration stalls or the vector is not positive.
    pub warning: Option<String>,
    proposal: InverseCdf,
    theta_max: f64,
    bound: f64,
}

impl InvariantDensity {
    pub fn new(disc: Discretization, tol: f64, max_iter: usize) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        let p = disc.leading(zero, tol, max_iter);
        let mut warning = None;
        if !p.converged {
            warning = Some(format!("power iteration stalled after {} steps (residual {:.3e}); the wall may be reducible", p.iterations, p.residual));
        }
        // fix the phase, then take the real part
        let s: Complex64 = p.vector.iter().sum();
        if s.norm() == 0.0 {
            return Err(Error::Numeric("Perron vector has zero mean".into()));
        }
        let rot = s.conj() / s.norm();
        let mut phi: Vec<f64> = p.vector.iter().map(|z| (z * rot).re).collect();
        if phi.iter().any(|&x| !(x > 0.0)) {
            warning.get_or_insert_with(|| "Perron vector is not entrywise positive; the wall may be reducible".into());
            for x in phi.iter_mut() {
                *x = x.max(0.0);
            }
        }

        let u: Vec<Complex64> = disc.lift(&phi.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        let wu = disc.w_apply(zero, &u);
        let diff: Vec<Complex64> = u.iter().zip(&wu).map(|(a, b)| a - b).collect();
        let residual = disc.mass(&diff) / disc.mass(&u);

        let z = normalization(&disc, &phi)?;
        for x in phi.iter_mut() {
            *x /= z;
        }

        let kernel = &disc.kernel;
        let sp = &kernel.speed;
        let (theta_min, theta_max) = match &kernel.profile {
            Profile::Maxwell { theta } => (theta.min(), theta.max()),
            Profile::Uniform => (1.0, 1.0),
        };
        let d = sp.dim as i32;
        let w = sp.weight;
        let prof = kernel.profile.clone();
        let proposal = InverseCdf::new(sp.r0, sp.rmax, 4096, |r| r.powi(d - 1) * w.eval(r) * profile_ratio(&prof, d, theta_max, r))?;
        // Psi / G(theta_max) <= max(phi) max_y (theta_max / theta_y)^{d/2} / gamma_y
        let dom = kernel.domain();
        let probe = dom.boundary_grid(1024)?;
        let mut worst: f64 = 0.0;
        for &y in probe.points.iter().chain(&disc.grid.points) {
            let th = kernel.theta_at(y).max(theta_min);
            worst = worst.max((theta_max / th).powf(sp.dim as f64 / 2.0) / kernel.gamma(y)?);
        }
        let pmax = phi.iter().cloned().fold(0.0, f64::max);
        let norm_g = match &kernel.profile {
            Profile::Maxwell { .. } => (2.0 * std::f64::consts::PI * theta_max).powf(-(sp.dim as f64) / 2.0),
            Profile::Uniform => 1.0,
        };
        let bound = 1.1 * pmax * worst / norm_g;
        Ok(Self { disc, phi, residual, iterations: p.iterations, warning, proposal, theta_max, bound })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Boundary density phi at the grid nodes (unit-mass scaling).
    pub fn boundary_values(&self) -> &[f64] {
        &self.phi
    }

    /// Rows (node, speed, value) of u = k phi on the grid.
    pub fn table(&self) -> Vec<(usize, f64, f64)> {
        let ns = self.disc.speed_len();
        let mut out = Vec::with_capacity(self.phi.len() * ns);
        for (i, p) in self.phi.iter().enumerate() {
            for a in 0..ns {
                out.push((i, self.disc.speeds.nodes[a], p * self.disc.kernel_value(i, a)));
            }
        }
        out
    }

    /// phi at an arbitrary boundary point: trigonometric interpolation in
    /// arc length on planar domains, Nystrom with the row-sum
    /// normalization on the ball.
    pub fn phi_at(&self, y: Vec3) -> Result<f64> {
        let dom = self.disc.kernel.domain();
        let g = &self.disc.grid;
        if self.disc.dim() == 2 {
            let x = 2.0 * std::f64::consts::PI * dom.arc_of(y) / dom.boundary_measure();
            return Ok(trig_weights(g.len(), x).iter().zip(&self.phi).map(|(w, p)| w * p).sum());
        }
        let scale = dom.diameter() * 1e-12;
        let (mut s, mut m) = (0.0, 0.0);
        for j in 0..g.len() {
            if (y - g.points[j]).norm() <= scale {
                return Ok(self.phi[j]);
            }
            let c = g.weights[j] * dom.jacobian(y, g.points[j])?;
            s += c * self.phi[j];
            m += c;
        }
        Ok(s / m)
    }

    /// Psi_H(x, v) for x inside the domain.
    pub fn eval(&self, x: Vec3, v: Vec3) -> Result<f64> {
        let kernel = &self.disc.kernel;
        let dom = kernel.domain();
        let t = dom.exit_time(x, v, Direction::Backward)?;
        let y = dom.project(x - v * t);
        Ok(kernel.eval(y, v.norm(), v.norm())? * self.phi_at(y)?)
    }
}

fn profile_ratio(p: &Profile, d: i32, theta: f64, r: f64) -> f64 {
    match p {
        Profile::Maxwell { .. } => (2.0 * std::f64::consts::PI * theta).powf(-(d as f64) / 2.0) * (-r * r / (2.0 * theta)).exp(),
        Profile::Uniform => 1.0,
    }
}

/// Z = sum_j w_j phi_j L_j sum_b rho_b^{d-1} w q_b k_jb, the interior mass of
/// the lift, with L_j the cosine-weighted mean chord from node j.
fn normalization(disc: &Discretization, phi: &[f64]) -> Result<f64> {
    let dom = disc.kernel.domain();
    let dim = disc.dim();
    let ns = disc.speed_len();
    let mut z = 0.0;
    for j in 0..disc.len() {
        let y = disc.grid.points[j];
        let n = disc.grid.normals[j];
        let mut chord = 0.0;
        for (s, w) in hemisphere_rule(-n, dim, CHORD_ORDER) {
            chord += w * s.dot(-n) * dom.exit_time(y, s, Direction::Forward)?;
        }
        let sp: f64 = (0..ns).map(|b| disc.speed_factor(b) / disc.speeds.nodes[b] * disc.kernel_value(j, b)).sum();
        z += disc.grid.weights[j] * phi[j] * chord * sp;
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Numeric(format!("invariant normalization is {z}")));
    }
    Ok(z)
}

impl PhaseSampler for InvariantDensity {
    /// Rejection from uniform position, isotropic direction and the hottest
    /// wall profile in speed.
    fn sample(&self, _index: u64, rng: &mut Stream) -> Result<(Vec3, Vec3)> {
        use rand::Rng;
        let kernel = &self.disc.kernel;
        let dom = kernel.domain();
        let d = kernel.speed.dim as i32;
        for _ in 0..100_000 {
            let x = dom.sample_interior(rng);
            let rho = self.proposal.sample(rng);
            let v = sample_direction(dom.dim(), rng) * rho;
            let r = self.eval(x, v)? / profile_ratio(&kernel.profile, d, self.theta_max, rho);
            if r > self.bound {
                return Err(Error::Numeric(format!("rejection bound {} exceeded by {r}", self.bound)));
            }
            if rng.random::<f64>() * self.bound < r {
                return Ok((x, v));
            }
        }
        domain("invariant sampler rejected 100000 proposals in a row")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::quad::Rule;
    use crate::transport::stream;
    use crate::velocity::{sphere_area, SpeedMeasure, Weight};
    use crate::wall::{BoundaryField, DiffuseKernel};

    fn density(dom: &Domain, profile: Profile) -> InvariantDensity {
        let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, dom.dim(), 64, 64).unwrap();
        let k = DiffuseKernel::new(profile, &sm, dom, 4096).unwrap();
        InvariantDensity::new(Discretization::new(&k, 128, 32).unwrap(), 1e-13, 10_000).unwrap()
    }

    #[test]
    fn constant_temperature_closed_form() {
        let dom = Domain::disk(1.0).unwrap();
        let inv = density(&dom, Profile::Maxwell { theta: BoundaryField::Constant(1.0) });
        assert!(inv.residual < 1e-10 && inv.warning.is_none());
        // Psi = M(rho) / (|Omega| |S| int rho w M drho)
        let m = |r: f64| (-r * r / 2.0).exp();
        let mass = Rule::composite(0.5, 3.0, 32, 16).integrate(|r| r * m(r));
        for (x, v) in [(Vec3::xy(0.1, 0.2), Vec3::xy(1.0, 0.3)), (Vec3::xy(-0.7, 0.1), Vec3::xy(-0.2, 2.1))] {
            let want = m(v.norm()) / (std::f64::consts::PI * sphere_area(2) * mass);
            let got = inv.eval(x, v).unwrap();
            assert!((got / want - 1.0).abs() < 1e-10, "{got} {want}");
        }
    }

    #[test]
    fn ellipse_density_has_unit_mass() {
        let dom = Domain::ellipse(2.0, 1.0).unwrap();
        let inv = density(&dom, Profile::Uniform);
        assert!(inv.residual < 1e-10);
        // polar grid on the ellipse x the speed rule
        let sp = &inv.discretization().kernel.speed;
        let rr = Rule::gauss(0.0, 1.0, 24);
        let ang = 48;
        let vr = Rule::gauss(sp.r0, sp.rmax, 16);
        let mut total = 0.0;
        for (&s, &ws) in rr.nodes.iter().zip(&rr.weights) {
            for a in 0..ang {
                let t = 2.0 * std::f64::consts::PI * (a as f64 + 0.5) / ang as f64;
                let x = Vec3::xy(2.0 * s * t.cos(), s * t.sin());
                let jac = 2.0 * s * ws * 2.0 * std::f64::consts::PI / ang as f64;
                for (&r, &wr) in vr.nodes.iter().zip(&vr.weights) {
                    for k in 0..32 {
                        let b = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 32.0;
                        let v = Vec3::xy(b.cos(), b.sin()) * r;
                        total += jac * wr * r * (2.0 * std::f64::consts::PI / 32.0) * inv.eval(x, v).unwrap();
                    }
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn sampler_matches_speed_law() {
        let dom = Domain::disk(1.0).unwrap();
        let inv = density(&dom, Profile::Maxwell { theta: BoundaryField::Constant(1.0) });
        let mut mean = 0.0;
        let n = 20_000;
        for i in 0..n {
            let (x, v) = inv.sample(i, &mut stream(3, i, 0)).unwrap();
            assert!(dom.contains(x));
            mean += v.norm();
        }
        let m = |r: f64| (-r * r / 2.0).exp();
        let rule = Rule::composite(0.5, 3.0, 32, 16);
        let want = rule.integrate(|r| r * r * m(r)) / rule.integrate(|r| r * m(r));
        assert!((mean / n as f64 - want).abs() < 0.02, "{} {want}", mean / n as f64);
    }
}
