//! The n2(lambda) kernel bound and the resolvent-tail check.
//!
//! n2(lambda) = sup_y sum_i w_i J(x_i, y) |E_y(lambda |x_i - y|)| with the
//! emission transform E_y(tau) = int rho^d w(rho) k(y, rho) exp(-tau / rho) drho.
//! For large |Im tau| the integrand oscillates quickly in rho, so E_y is
//! computed in s = 1 / rho, where the exponential is exactly integrable
//! against piecewise-linear interpolants (Filon).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::Discretization;
use crate::error::{domain, Error, Result};
use crate::velocity::kappa;
use crate::wall::DiffuseKernel;
use crate::vec3::Vec3;

/// Piecewise-linear Filon rule for E_y on a uniform grid in s = 1 / rho.
#[derive(Debug, Clone)]
pub struct FilonTransform {
    s0: f64,
    ds: f64,
    h: Vec<f64>,
}

impl FilonTransform {
    pub fn new(kernel: &DiffuseKernel, y: Vec3, cells: usize) -> Result<Self> {
        if cells < 2 {
            return domain("Filon rule needs at least two cells");
        }
        let sp = &kernel.speed;
        let d = sp.dim as i32;
        let (s0, s1) = (1.0 / sp.rmax, 1.0 / sp.r0);
        let ds = (s1 - s0) / cells as f64;
        let h = (0..=cells)
            .map(|k| {
                let s = s0 + k as f64 * ds;
                let rho = (1.0 / s).clamp(sp.r0, sp.rmax);
                Ok(s.powi(-d - 2) * sp.weight.eval(rho) * kernel.eval(y, rho, rho)?)
            })
            .collect::<Result<_>>()?;
        Ok(Self { s0, ds, h })
    }

    pub fn eval(&self, tau: Complex64) -> Complex64 {
        let zd = tau * self.ds;
        // cell moments int_0^ds u^p e^{-tau u} du, p = 0, 1
        let (i0, i1) = if zd.norm() < 1e-4 {
            let d = self.ds;
            (d * (1.0 - zd / 2.0 + zd * zd / 6.0), d * d * (0.5 - zd / 3.0 + zd * zd / 8.0))
        } else {
            let e = (-zd).exp();
            ((1.0 - e) / tau, (1.0 - e * (1.0 + zd)) / (tau * tau))
        };
        let step = (-zd).exp();
        let mut ea = (-tau * self.s0).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        for w in self.h.windows(2) {
            acc += ea * (i0 * w[0] + i1 * ((w[1] - w[0]) / self.ds));
            ea *= step;
        }
        acc
    }
}

/// n2(lambda) on the discretization's boundary grid with `cells` Filon cells.
pub fn decay_bound_n2(disc: &Discretization, lambda: Complex64, cells: usize) -> Result<f64> {
    if lambda.norm() == 0.0 {
        return domain("n2 is only defined for lambda != 0");
    }
    let n = disc.len();
    // rotation invariance leaves one source on the disk
    let sources: Vec<usize> = if disc.kernel.is_uniform_in_x() && matches!(disc.kernel.domain().shape(), crate::geometry::Shape::Disk { .. }) {
        vec![0]
    } else {
        let stride = n.div_ceil(64).max(1);
        (0..n).step_by(stride).collect()
    };
    let vals: Vec<f64> = sources
        .par_iter()
        .map(|&j| -> Result<f64> {
            let e = FilonTransform::new(&disc.kernel, disc.grid.points[j], cells)?;
            Ok((0..n).map(|i| disc.grid.weights[i] * disc.jacobian(i, j).abs() * e.eval(lambda * disc.distance(i, j)).norm()).sum())
        })
        .collect::<Result<_>>()?;
    let v = vals.into_iter().fold(0.0, f64::max);
    if !v.is_finite() {
        return Err(Error::Numeric(format!("n2 is not finite at lambda = {lambda}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub lambda: Complex64,
    pub n: usize,
    /// || W^N (I - W)^{-1} ||_{L1}
    pub tail: f64,
    /// tail * (1 - exp(-D Re(lambda) / r0))
    pub lhs: f64,
    /// (C / |lambda|)^{floor(N / 2)}
    pub bound: f64,
    pub holds: bool,
}

/// Compare the summed resolvent tail with the bound built from the
/// measured decay constant `c` (the sup of n2 |lambda|).
pub fn tail_check(disc: &Discretization, lambda: Complex64, n: usize, c: f64) -> Result<TailCheck> {
    if !(lambda.re > 0.0) {
        return domain("the tail series needs Re(lambda) > 0");
    }
    if n == 0 {
        return domain("tail index must be positive");
    }
    let nb = disc.len();
    let ns = disc.speed_len();
    let b = disc.b_matrix(lambda);
    let id = DMatrix::<Complex64>::identity(nb, nb);
    let inv = (&id - &b).lu().try_inverse().ok_or_else(|| Error::Numeric(format!("I - W is singular at lambda = {lambda}")))?;
    let mut m = inv;
    for _ in 1..n {
        m = &b * m;
    }
    // unit point sources at (j, b) pushed through P
    let kap = kappa(disc.dim());
    let p = DMatrix::from_fn(nb, nb * ns, |i, col| {
        let (j, s) = (col / ns, col % ns);
        let e = (-lambda * disc.distance(i, j) / disc.speeds.nodes[s]).exp();
        e * (disc.jacobian(i, j) / kap)
    });
    let mp = &m * p;
    let tail = (0..nb * ns)
        .map(|col| (0..nb).map(|i| disc.grid.weights[i] * mp[(i, col)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let dom = disc.kernel.domain();
    let lhs = tail * (1.0 - (-dom.diameter() * lambda.re / disc.kernel.speed.r0).exp());
    let bound = (c / lambda.norm()).powi((n / 2) as i32);
    Ok(TailCheck { lambda, n, tail, lhs, bound, holds: lhs <= bound })
}
