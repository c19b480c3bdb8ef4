//! Radial velocity measure m(dv) = w(|v|) dv on the annulus r0 <= |v| <= R0.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, finite, Result};
use crate::quad::Rule;
use crate::vec3::Vec3;

/// Radial weight profile w(rho).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    /// rho^m, m >= 0
    Power { m: f64 },
    /// exp(alpha rho^s), 0 < s < 2
    StretchedExp { alpha: f64, s: f64 },
    /// exp(beta rho^2)
    GaussianGrowth { beta: f64 },
}

impl Weight {
    pub fn eval(&self, rho: f64) -> f64 {
        match *self {
            Weight::Power { m } => rho.powf(m),
            Weight::StretchedExp { alpha, s } => (alpha * rho.powf(s)).exp(),
            Weight::GaussianGrowth { beta } => (beta * rho * rho).exp(),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match *self {
            Weight::Power { m } => {
                if m == 0.0 {
                    0.0
                } else {
                    m * rho.powf(m - 1.0)
                }
            }
            Weight::StretchedExp { alpha, s } => alpha * s * rho.powf(s - 1.0) * self.eval(rho),
            Weight::GaussianGrowth { beta } => 2.0 * beta * rho * self.eval(rho),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Weight::Power { m } if !(m >= 0.0 && m.is_finite()) => domain("power weight needs m >= 0"),
            Weight::StretchedExp { alpha, s } if !(s > 0.0 && s < 2.0 && alpha.is_finite()) => {
                domain("stretched exponential needs 0 < s < 2")
            }
            Weight::GaussianGrowth { beta } if !beta.is_finite() => domain("gaussian growth needs finite beta"),
            _ => Ok(()),
        }
    }
}

/// |S^{d-1}|: 2 pi in the plane, 4 pi in space.
pub fn sphere_area(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * PI
    } else {
        4.0 * PI
    }
}

/// Integral of |sigma.n| over the half sphere: 2 in the plane, pi in space.
pub fn kappa(dim: usize) -> f64 {
    if dim == 2 {
        2.0
    } else {
        PI
    }
}

#[derive(Debug, Clone)]
pub struct SpeedMeasure {
    pub r0: f64,
    pub rmax: f64,
    pub weight: Weight,
    pub dim: usize,
    pub radial: Rule,
    pub angular: usize,
}

impl SpeedMeasure {
    pub fn new(r0: f64, rmax: f64, weight: Weight, dim: usize, radial_order: usize, angular: usize) -> Result<Self> {
        if !(r0 > 0.0 && rmax > r0 && rmax.is_finite()) {
            return domain(format!("need 0 < r0 < Rmax, got r0={r0}, Rmax={rmax}"));
        }
        if dim != 2 && dim != 3 {
            return domain(format!("dimension must be 2 or 3, got {dim}"));
        }
        if radial_order == 0 || angular < 2 {
            return domain("quadrature orders too small");
        }
        weight.validate()?;
        Ok(Self { r0, rmax, weight, dim, radial: Rule::gauss(r0, rmax, radial_order), angular })
    }

    /// Same measure with a different radial order.
    pub fn with_radial_order(&self, n: usize) -> Self {
        Self { radial: Rule::gauss(self.r0, self.rmax, n), ..self.clone() }
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.r0 * (1.0 - 1e-12) && rho <= self.rmax * (1.0 + 1e-12)
    }

    /// Radial density of m0 = |S| rho^{d-1} w(rho).
    pub fn m0_density(&self, rho: f64) -> f64 {
        sphere_area(self.dim) * rho.powi(self.dim as i32 - 1) * self.weight.eval(rho)
    }

    /// (1/|S|) int m0(drho) int psi(rho sigma) dsigma, i.e. int psi dm.
    pub fn polar_integrate(&self, psi: impl Fn(Vec3) -> f64) -> Result<f64> {
        let mut total = 0.0;
        let dirs = sphere_rule(self.dim, self.angular);
        for (&rho, &q) in self.radial.nodes.iter().zip(&self.radial.weights) {
            let mut inner = 0.0;
            for (s, w) in &dirs {
                inner += w * psi(*s * rho);
            }
            total += q * rho.powi(self.dim as i32 - 1) * self.weight.eval(rho) * inner;
        }
        finite(total, "polar integral")
    }
}

/// Quadrature on the unit circle (uniform) or sphere (Gauss in cos theta x uniform azimuth).
pub fn sphere_rule(dim: usize, n: usize) -> Vec<(Vec3, f64)> {
    if dim == 2 {
        (0..n)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (Vec3::xy(a.cos(), a.sin()), 2.0 * PI / n as f64)
            })
            .collect()
    } else {
        let nt = (n / 2).max(2);
        let np = n.max(4);
        let r = Rule::gauss(-1.0, 1.0, nt);
        let mut out = Vec::with_capacity(nt * np);
        for (&c, &w) in r.nodes.iter().zip(&r.weights) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..np {
                let a = 2.0 * PI * (k as f64 + 0.5) / np as f64;
                out.push((Vec3::new(s * a.cos(), s * a.sin(), c), w * 2.0 * PI / np as f64));
            }
        }
        out
    }
}

/// Quadrature on the half sphere {sigma . n > 0}: Gauss in the angle to `n`
/// (planar) or in its cosine times a uniform azimuth.
pub fn hemisphere_rule(n: Vec3, dim: usize, order: usize) -> Vec<(Vec3, f64)> {
    if dim == 2 {
        let t = n.perp();
        let r = Rule::composite(-PI / 2.0, PI / 2.0, 4, order.div_ceil(4).max(2));
        r.nodes.iter().zip(&r.weights).map(|(&a, &w)| (n * a.cos() + t * a.sin(), w)).collect()
    } else {
        let (e1, e2) = n.frame();
        let r = Rule::gauss(0.0, 1.0, order.max(2));
        let np = 2 * order.max(2);
        let mut out = Vec::with_capacity(r.len() * np);
        for (&c, &w) in r.nodes.iter().zip(&r.weights) {
            let s = (1.0 - c * c).sqrt();
            for k in 0..np {
                let a = 2.0 * PI * (k as f64 + 0.5) / np as f64;
                out.push((n * c + (e1 * a.cos() + e2 * a.sin()) * s, w * 2.0 * PI / np as f64));
            }
        }
        out
    }
}

/// Tabulated inverse CDF of a density on [lo, hi], linear between table points.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(lo: f64, hi: f64, resolution: usize, h: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) || resolution < 2 {
            return domain("inverse CDF needs hi > lo and resolution >= 2");
        }
        let cell = Rule::gauss(0.0, 1.0, 4);
        let dx = (hi - lo) / resolution as f64;
        let mut xs = Vec::with_capacity(resolution + 1);
        let mut cdf = Vec::with_capacity(resolution + 1);
        xs.push(lo);
        cdf.push(0.0);
        let mut acc = 0.0;
        for k in 0..resolution {
            let x0 = lo + k as f64 * dx;
            let m = cell.integrate(|u| h(x0 + u * dx)) * dx;
            if m < 0.0 || !m.is_finite() {
                return domain("density must be nonnegative and finite");
            }
            acc += m;
            xs.push(x0 + dx);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return domain("density vanishes identically on the interval");
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(Self { xs, cdf })
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&c| c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[k - 1] + t.clamp(0.0, 1.0) * (self.xs[k] - self.xs[k - 1])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&t| t <= x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.cdf[k - 1] + t * (self.cdf[k] - self.cdf[k - 1])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        *self.xs.last().unwrap()
    }
}

/// Direction with density |sigma.n| / kappa_d on the half sphere around `n_in`.
pub fn sample_cosine_direction<R: Rng + ?Sized>(n_in: Vec3, dim: usize, rng: &mut R) -> Vec3 {
    if dim == 2 {
        let th = (2.0 * rng.random::<f64>() - 1.0).asin();
        let t = n_in.perp();
        n_in * th.cos() + t * th.sin()
    } else {
        let u: f64 = rng.random();
        let phi = 2.0 * PI * rng.random::<f64>();
        let c = u.sqrt();
        let s = (1.0 - u).sqrt();
        let (e1, e2) = n_in.frame();
        n_in * c + (e1 * phi.cos() + e2 * phi.sin()) * s
    }
}

/// Isotropic unit vector.
pub fn sample_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec3 {
    if dim == 2 {
        let a = 2.0 * PI * rng.random::<f64>();
        Vec3::xy(a.cos(), a.sin())
    } else {
        let c = 2.0 * rng.random::<f64>() - 1.0;
        let s = (1.0 - c * c).sqrt();
        let a = 2.0 * PI * rng.random::<f64>();
        Vec3::new(s * a.cos(), s * a.sin(), c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sm(r0: f64, r1: f64) -> SpeedMeasure {
        SpeedMeasure::new(r0, r1, Weight::Power { m: 0.0 }, 2, 32, 64).unwrap()
    }

    #[test]
    fn annulus_area() {
        let v = sm(0.5, 1.0).polar_integrate(|_| 1.0).unwrap();
        assert!((v - PI * 0.75).abs() < 1e-12);
        assert!((v - 2.3561945).abs() < 1e-7);
    }

    #[test]
    fn second_moment() {
        let v = sm(0.5, 1.0).polar_integrate(|v| v.norm2()).unwrap();
        assert!((v - PI / 2.0 * (1.0 - 0.0625)).abs() < 1e-12);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let v = sm(0.5, 3.0).polar_integrate(|v| v.x).unwrap();
        assert!(v.abs() < 1e-12);
        let s3 = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 1.0 }, 3, 16, 16).unwrap();
        assert!(s3.polar_integrate(|v| v.z * v.norm()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ball_shell_volume() {
        let s3 = SpeedMeasure::new(0.5, 1.0, Weight::Power { m: 0.0 }, 3, 16, 16).unwrap();
        let v = s3.polar_integrate(|_| 1.0).unwrap();
        assert!((v - 4.0 / 3.0 * PI * (1.0 - 0.125)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_annulus() {
        assert!(SpeedMeasure::new(1.0, 0.5, Weight::Power { m: 0.0 }, 2, 8, 8).is_err());
        assert!(SpeedMeasure::new(0.0, 0.5, Weight::Power { m: 0.0 }, 2, 8, 8).is_err());
        assert!(SpeedMeasure::new(0.5, 1.0, Weight::StretchedExp { alpha: 1.0, s: 2.5 }, 2, 8, 8).is_err());
    }

    #[test]
    fn inverse_cdf_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = InverseCdf::new(0.5, 1.0, 4096, |_| 1.0).unwrap();
        let n = 200_000;
        let m: f64 = (0..n).map(|_| t.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - 0.75).abs() < 3e-3);
        let t = InverseCdf::new(0.5, 1.0, 4096, |r| r).unwrap();
        let m: f64 = (0..n).map(|_| t.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((m - 7.0 / 24.0 / 0.375).abs() < 3e-3);
        assert!(InverseCdf::new(0.5, 1.0, 64, |_| 0.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let t = InverseCdf::new(0.5, 3.0, 4096, |r| r * r * (-r * r / 2.0).exp()).unwrap();
        for k in 1..50 {
            let u = k as f64 / 50.0;
            assert!((t.cdf(t.quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_law_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = Vec3::xy(0.6, -0.8);
        let k = 200_000;
        let mut m = 0.0;
        for _ in 0..k {
            let s = sample_cosine_direction(n, 2, &mut rng);
            assert!(s.dot(n) > 0.0 && (s.norm() - 1.0).abs() < 1e-12);
            m += s.dot(n);
        }
        assert!((m / k as f64 - PI / 4.0).abs() < 3e-3);
        let n3 = Vec3::new(0.0, 0.6, 0.8);
        let mut m = 0.0;
        for _ in 0..k {
            let s = sample_cosine_direction(n3, 3, &mut rng);
            assert!(s.dot(n3) > 0.0 && (s.norm() - 1.0).abs() < 1e-12);
            m += s.dot(n3);
        }
        assert!((m / k as f64 - 2.0 / 3.0).abs() < 3e-3);
    }

    #[test]
    fn hemisphere_flux_integrals() {
        // int_{sigma.n > 0} sigma.n dsigma = kappa_d
        let n = Vec3::xy(0.6, -0.8);
        let r = hemisphere_rule(n, 2, 32);
        assert!(r.iter().all(|(s, _)| s.dot(n) > 0.0));
        let f: f64 = r.iter().map(|(s, w)| w * s.dot(n)).sum();
        assert!((f - kappa(2)).abs() < 1e-13);
        let n3 = Vec3::new(0.0, 0.6, 0.8);
        let r = hemisphere_rule(n3, 3, 16);
        let f: f64 = r.iter().map(|(s, w)| w * s.dot(n3)).sum();
        assert!((f - kappa(3)).abs() < 1e-13);
        let a: f64 = r.iter().map(|(_, w)| w).sum();
        assert!((a - 2.0 * PI).abs() < 1e-12);
    }
}
