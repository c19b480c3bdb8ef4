//! Single terms of the resolvent series and the truncated kernel norm.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::Discretization;
use crate::error::{domain, Error, Result};
use crate::geometry::{Direction, Domain};
use crate::quad::Rule;
use crate::vec3::Vec3;
use crate::velocity::hemisphere_rule;

/// Quadrature orders for the characteristic integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChordQuadrature {
    pub directions: usize,
    pub chord: usize,
}

impl Default for ChordQuadrature {
    fn default() -> Self {
        Self { directions: 32, chord: 24 }
    }
}

pub type Observable<'a> = &'a (dyn Fn(Vec3, Vec3) -> f64 + Sync);

/// sum_b rho_b^d w q_b k_jb-weighted integral over the half sphere around
/// `normal` of |sigma . n| int_0^tau h(x + s v, v) e^{-lambda s} ds,
/// where the ray runs forward (`sign` = 1) or backward (`sign` = -1).
#[allow(clippy::too_many_arguments)]
fn flux_of_chords(
    disc: &Discretization,
    j: usize,
    lambda: Complex64,
    h: Observable,
    q: ChordQuadrature,
    unit: &Rule,
    sign: f64,
    emit: bool,
) -> Result<Complex64> {
    let dom = disc.kernel.domain();
    let x = disc.grid.points[j];
    let n = disc.grid.normals[j];
    let dirs = hemisphere_rule(n * sign, disc.dim(), q.directions);
    let dir = if sign > 0.0 { Direction::Backward } else { Direction::Forward };
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..disc.speed_len() {
        let rho = disc.speeds.nodes[b];
        let weight = disc.speed_factor(b) * if emit { disc.kernel_value(j, b) } else { 1.0 };
        let mut inner = Complex64::new(0.0, 0.0);
        for &(s, ws) in &dirs {
            let v = s * rho;
            let tau = dom.exit_time(x, v, dir)?;
            if tau == 0.0 {
                continue;
            }
            let step = if sign > 0.0 { -1.0 } else { 1.0 };
            let mut line = Complex64::new(0.0, 0.0);
            for (&u, &wu) in unit.nodes.iter().zip(&unit.weights) {
                let t = u * tau;
                line += (-lambda * t).exp() * (wu * h(x + v * (step * t), v));
            }
            inner += line * (ws * s.dot(n * sign) * tau);
        }
        acc += inner * weight;
    }
    Ok(acc)
}

/// <g, Xi_lambda H (M_lambda H)^n G_lambda f> on the discretization's grids.
pub fn resolvent_term(disc: &Discretization, n: usize, lambda: Complex64, f: Observable, g: Observable, q: ChordQuadrature) -> Result<Complex64> {
    if !(lambda.re > 0.0) {
        return domain("the resolvent series needs Re(lambda) > 0");
    }
    if q.directions < 2 || q.chord < 1 {
        return domain("chord quadrature orders too small");
    }
    let unit = Rule::gauss(0.0, 1.0, q.chord);
    let nb = disc.len();
    // outgoing flux of G_lambda f
    let out: Vec<Complex64> = (0..nb)
        .into_par_iter()
        .map(|j| flux_of_chords(disc, j, lambda, f, q, &unit, 1.0, false))
        .collect::<Result<_>>()?;
    let mut phi = DVector::from_vec(out);
    if n > 0 {
        let b = disc.b_matrix(lambda);
        for _ in 0..n {
            phi = &b * phi;
        }
    }
    // lift of k phi_n into the interior, paired with g
    let lift: Vec<Complex64> = (0..nb)
        .into_par_iter()
        .map(|j| flux_of_chords(disc, j, lambda, g, q, &unit, -1.0, true))
        .collect::<Result<_>>()?;
    let val: Complex64 = (0..nb).map(|j| lift[j] * phi[j] * disc.grid.weights[j]).sum();
    if !(val.re.is_finite() && val.im.is_finite()) {
        return Err(Error::Numeric(format!("resolvent term is not finite at lambda = {lambda}")));
    }
    Ok(val)
}

/// sup over boundary nodes y of int_{|x-y| < eps} |x-y|^{1+2a-d} pi(dx).
pub fn truncated_kernel_norm(dom: &Domain, eps: f64, alpha: f64, nodes: usize, order: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= dom.diameter()) {
        return domain(format!("need 0 < eps <= D, got {eps}"));
    }
    let p = 1.0 + 2.0 * alpha - dom.dim() as f64;
    let grid = dom.boundary_grid(nodes)?;
    let sources: Vec<Vec3> = match dom.shape() {
        crate::geometry::Shape::Ellipse { .. } => grid.points,
        _ => vec![grid.points[0]],
    };
    let v = sources
        .iter()
        .map(|&y| dom.near_integral(y, eps, order, |x| (x - y).norm().powf(p)))
        .fold(0.0, f64::max);
    crate::error::finite(v, "truncated kernel norm")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::velocity::{SpeedMeasure, Weight};
    use crate::wall::{BoundaryField, DiffuseKernel, Profile};

    fn disc() -> Discretization {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
        let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
        Discretization::new(&k, 64, 16).unwrap()
    }

    #[test]
    fn zero_source_gives_zero() {
        let d = disc();
        let z = resolvent_term(&d, 1, Complex64::new(1.0, 0.0), &|_, _| 0.0, &|_, _| 1.0, ChordQuadrature::default()).unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
        assert!(resolvent_term(&d, 0, Complex64::new(0.0, 1.0), &|_, _| 1.0, &|_, _| 1.0, ChordQuadrature::default()).is_err());
    }

    #[test]
    fn terms_obey_the_resolvent_bound() {
        // |term| <= |g|_inf |f|_1 / Re(lambda); f = 1 on the phase space has
        // |f|_1 = |Omega| m(V) = pi * pi (9 - 1/4)
        let d = disc();
        let f1 = std::f64::consts::PI * std::f64::consts::PI * (9.0 - 0.25);
        for n in 0..3 {
            let lam = Complex64::new(1.0, 2.0);
            let z = resolvent_term(&d, n, lam, &|_, _| 1.0, &|x, _| x.x.cos(), ChordQuadrature::default()).unwrap();
            assert!(z.norm() <= f1 / lam.re, "{n} {z}");
        }
    }

    #[test]
    fn series_sums_to_the_full_resolvent() {
        // with f = g = 1, sum_n terms + <1, R_0 f> = |f|_1 / lambda
        let d = disc();
        let lam = Complex64::new(2.0, 0.0);
        let q = ChordQuadrature::default();
        let f1 = std::f64::consts::PI * std::f64::consts::PI * (9.0 - 0.25);
        let mut total = 0.0;
        for n in 0..40 {
            total += resolvent_term(&d, n, lam, &|_, _| 1.0, &|_, _| 1.0, q).unwrap().re;
        }
        // free part: int (1 - e^{-lambda t_+}) / lambda over the phase space
        let sp = &d.kernel.speed;
        let dom = d.kernel.domain();
        let rr = Rule::gauss(0.0, 1.0, 24);
        let vr = Rule::gauss(sp.r0, sp.rmax, 24);
        let mut free = 0.0;
        for (&s, &ws) in rr.nodes.iter().zip(&rr.weights) {
            let x = Vec3::xy(s, 0.0);
            for (&r, &wr) in vr.nodes.iter().zip(&vr.weights) {
                for k in 0..64 {
                    let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 64.0;
                    let v = Vec3::xy(a.cos(), a.sin()) * r;
                    let t = dom.exit_time(x, v, Direction::Forward).unwrap();
                    free += 2.0 * std::f64::consts::PI * s * ws * wr * r * (2.0 * std::f64::consts::PI / 64.0) * (1.0 - (-2.0 * t).exp()) / 2.0;
                }
            }
        }
        assert!(((total + free) / (f1 / 2.0) - 1.0).abs() < 1e-3, "{} {}", total + free, f1 / 2.0);
    }

    #[test]
    fn truncated_norm_quarters_on_halving() {
        let dom = Domain::disk(1.0).unwrap();
        let a = truncated_kernel_norm(&dom, 0.2, 1.0, 64, 16).unwrap();
        let b = truncated_kernel_norm(&dom, 0.1, 1.0, 64, 16).unwrap();
        assert!((a / b - 4.0).abs() < 0.05, "{}", a / b);
        assert!((b - 0.01).abs() < 1e-4);
        assert!(truncated_kernel_norm(&dom, 0.0, 1.0, 64, 16).is_err());
    }
}
