//! Brute-force discretization of M_lambda H on the outgoing boundary phase
//! space, with nodes (boundary node, speed, angle to the normal).
//!
//! Planar domains only. The backward trace from a node lands between
//! boundary nodes; values there come from trigonometric interpolation in
//! arc length. Reflection parts (alpha > 0) need the reflected angle to be
//! a grid angle, which holds on the disk.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::eigen::{eigenvalues, power_iteration, PowerResult};
use crate::error::{domain, Error, Result};
use crate::geometry::{BoundaryGrid, Direction, Shape};
use crate::quad::Rule;
use crate::vec3::Vec3;
use crate::wall::{BoundaryField, Wall};

pub const FULL_CAP: usize = 1 << 17;

#[derive(Debug, Clone)]
pub struct FullGrid {
    nb: usize,
    ns: usize,
    nd: usize,
    pub grid: BoundaryGrid,
    pub speeds: Rule,
    pub angles: Rule,
    /// chord length of the backward trace, [i * nd + c]
    ell: Vec<f64>,
    /// trig interpolation weights at the trace foot, [(i * nd + c) * nb + j]
    interp: Vec<f64>,
    /// grid angle of the reflected velocity at the trace foot
    refl: Vec<usize>,
    /// emission kernel at the trace foot, [(i * nd + c) * ns + b]
    ky: Vec<f64>,
    alpha: Vec<f64>,
    /// rho^d w(rho) q_b cos(theta_c) a_c, [b * nd + c]
    flux: Vec<f64>,
    /// angular offset of the trace foot on the disk, per angle node
    offset: Vec<f64>,
    disk: bool,
    uniform: bool,
}

/// Weights of periodic trigonometric interpolation on n equispaced samples.
pub(super) fn trig_weights(n: usize, x: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let u = x - 2.0 * PI * j as f64 / n as f64;
            let s = (0.5 * u).sin();
            if s.abs() < 1e-14 {
                // u is a multiple of 2 pi
                return if (0.5 * u).cos() > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
            }
            if n.is_multiple_of(2) {
                (0.5 * n as f64 * u).sin() * (0.5 * u).cos() / (n as f64 * s)
            } else {
                (0.5 * n as f64 * u).sin() / (n as f64 * s)
            }
        })
        .collect()
}

impl FullGrid {
    pub fn new(wall: &Wall, boundary_nodes: usize, speed_nodes: usize, direction_nodes: usize, cap: usize) -> Result<Self> {
        let dom = wall.diffuse.domain();
        if dom.dim() != 2 {
            return domain("the full-grid oracle is planar");
        }
        let total = boundary_nodes * speed_nodes * direction_nodes;
        if total > cap {
            return Err(Error::TooLarge { nodes: total, cap });
        }
        let disk = matches!(dom.shape(), Shape::Disk { .. });
        if wall.alpha.max() > 0.0 && !disk {
            return domain("reflection parts are only discretized on the disk");
        }
        let (nb, ns, nd) = (boundary_nodes, speed_nodes, direction_nodes);
        let grid = dom.boundary_grid(nb)?;
        let sp = &wall.diffuse.speed;
        let speeds = Rule::gauss(sp.r0, sp.rmax, ns);
        let angles = Rule::gauss(-0.5 * PI, 0.5 * PI, nd);
        let per = dom.boundary_measure();
        let mut flux = vec![0.0; ns * nd];
        for b in 0..ns {
            let r = speeds.nodes[b];
            for c in 0..nd {
                flux[b * nd + c] = r * r * sp.weight.eval(r) * speeds.weights[b] * angles.nodes[c].cos() * angles.weights[c];
            }
        }
        let cells: Vec<_> = (0..nb * nd)
            .into_par_iter()
            .map(|ic| -> Result<(f64, Vec<f64>, usize, Vec<f64>, f64)> {
                let (i, c) = (ic / nd, ic % nd);
                let x = grid.points[i];
                let n = grid.normals[i];
                let th = angles.nodes[c];
                let sigma = n * th.cos() + n.perp() * th.sin();
                let l = dom.exit_time(x, sigma, Direction::Backward)?;
                let y = dom.project(x - sigma * l);
                let s = dom.arc_of(y);
                let w = trig_weights(nb, 2.0 * PI * s / per);
                let ny = dom.normal(y);
                let out = wall.reflection.apply(sigma, ny);
                let thw = out.dot(ny.perp()).atan2(out.dot(ny));
                let refl = (0..nd)
                    .min_by(|&a, &b| (angles.nodes[a] - thw).abs().total_cmp(&(angles.nodes[b] - thw).abs()))
                    .unwrap();
                if disk && (angles.nodes[refl] - thw).abs() > 1e-8 {
                    return Err(Error::Assembly(format!("reflected angle {thw} is not a grid angle")));
                }
                let mut k: Vec<f64> = (0..ns).map(|b| wall.diffuse.eval(y, speeds.nodes[b], speeds.nodes[b])).collect::<Result<_>>()?;
                // discrete normalization keeps lambda = 0 stochastic
                let z: f64 = (0..ns).map(|b| k[b] * (0..nd).map(|cc| flux[b * nd + cc]).sum::<f64>()).sum();
                for v in k.iter_mut() {
                    *v /= z;
                }
                Ok((l, w, refl, k, wall.alpha.eval(dom, y)))
            })
            .collect::<Result<_>>()?;
        let mut ell = Vec::with_capacity(nb * nd);
        let mut interp = Vec::with_capacity(nb * nd * nb);
        let mut refl = Vec::with_capacity(nb * nd);
        let mut ky = Vec::with_capacity(nb * nd * ns);
        let mut alpha = Vec::with_capacity(nb * nd);
        for (l, w, r, k, a) in cells {
            ell.push(l);
            interp.extend(w);
            refl.push(r);
            ky.extend(k);
            alpha.push(a);
        }
        let offset = (0..nd)
            .map(|c| {
                let x = grid.points[0];
                let th = angles.nodes[c];
                let sigma = grid.normals[0] * th.cos() + grid.normals[0].perp() * th.sin();
                let y: Vec3 = x - sigma * ell[c];
                (y.y.atan2(y.x) - x.y.atan2(x.x) + PI).rem_euclid(2.0 * PI) - PI
            })
            .collect();
        let uniform = wall.diffuse.is_uniform_in_x() && matches!(wall.alpha, BoundaryField::Constant(_));
        Ok(Self { nb, ns, nd, grid, speeds, angles, ell, interp, refl, ky, alpha, flux, offset, disk, uniform })
    }

    pub fn len(&self) -> usize {
        self.nb * self.ns * self.nd
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn idx(&self, i: usize, b: usize, c: usize) -> usize {
        (i * self.ns + b) * self.nd + c
    }

    /// Node measure of mu_+ at (i, b, c).
    pub fn measure(&self, k: usize) -> f64 {
        let i = k / (self.ns * self.nd);
        self.grid.weights[i] * self.flux[k % (self.ns * self.nd)]
    }

    pub fn mass(&self, psi: &[Complex64]) -> f64 {
        psi.iter().enumerate().map(|(k, z)| self.measure(k) * z.norm()).sum()
    }

    pub fn apply(&self, lambda: Complex64, psi: &[Complex64]) -> Vec<Complex64> {
        let (nb, ns, nd) = (self.nb, self.ns, self.nd);
        let outflux: Vec<Complex64> = (0..nb)
            .map(|j| (0..ns * nd).map(|bc| psi[j * ns * nd + bc] * self.flux[bc]).sum())
            .collect();
        let blocks: Vec<Vec<(usize, Complex64)>> = (0..nb * nd)
            .into_par_iter()
            .map(|ic| {
                let (i, c) = (ic / nd, ic % nd);
                let w = &self.interp[ic * nb..(ic + 1) * nb];
                let fy: Complex64 = (0..nb).map(|j| outflux[j] * w[j]).sum();
                let a = self.alpha[ic];
                (0..ns)
                    .map(|b| {
                        let mut v = fy * ((1.0 - a) * self.ky[ic * ns + b]);
                        if a > 0.0 {
                            let r = self.refl[ic];
                            let py: Complex64 = (0..nb).map(|j| psi[self.idx(j, b, r)] * w[j]).sum();
                            v += py * a;
                        }
                        (self.idx(i, b, c), v * (-lambda * self.ell[ic] / self.speeds.nodes[b]).exp())
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for blk in blocks {
            for (k, v) in blk {
                out[k] = v;
            }
        }
        out
    }

    /// Leading eigenpair by power iteration.
    pub fn leading(&self, lambda: Complex64, tol: f64, max_iter: usize) -> PowerResult {
        let apply = |x: &[Complex64]| self.apply(lambda, x);
        let norm = |x: &[Complex64]| self.mass(x);
        power_iteration(&apply, &norm, vec![Complex64::new(1.0, 0.0); self.len()], tol, max_iter)
    }

    /// Restriction to boundary Fourier mode `m` (disk, uniform wall only):
    /// a dense (speed x angle) matrix.
    pub fn fourier_block(&self, m: i64, lambda: Complex64) -> Result<DMatrix<Complex64>> {
        if !self.disk || !self.uniform {
            return domain("Fourier blocks need a disk with a rotation-invariant wall");
        }
        let (ns, nd) = (self.ns, self.nd);
        let a = self.alpha[0];
        Ok(DMatrix::from_fn(ns * nd, ns * nd, |row, col| {
            let (b, c) = (row / nd, row % nd);
            let (b2, c2) = (col / nd, col % nd);
            let mut v = (1.0 - a) * self.ky[c * ns + b] * self.flux[col];
            if b == b2 && c2 == self.refl[c] {
                v += a;
            }
            let phase = Complex64::from_polar(1.0, m as f64 * self.offset[c]);
            phase * (-lambda * self.ell[c] / self.speeds.nodes[b]).exp() * v
        }))
    }

    /// Eigenvalues of the Fourier blocks |m| <= m_max, tagged by mode.
    pub fn fourier_spectrum(&self, lambda: Complex64, m_max: i64) -> Result<Vec<(i64, Complex64)>> {
        let m_max = m_max.min(self.nb as i64 / 2);
        let per: Vec<Vec<(i64, Complex64)>> = (-m_max..=m_max)
            .into_par_iter()
            .map(|m| -> Result<Vec<(i64, Complex64)>> {
                Ok(eigenvalues(self.fourier_block(m, lambda)?, lambda)?.into_iter().map(|z| (m, z)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(per.into_iter().flatten().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::velocity::{SpeedMeasure, Weight};
    use crate::wall::{DiffuseKernel, Profile, Reflection};

    fn wall(alpha: f64, refl: Reflection) -> Wall {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(0.5, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
        let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
        Wall::new(k, BoundaryField::Constant(alpha), refl).unwrap()
    }

    #[test]
    fn trig_interpolation_reproduces_low_modes() {
        let n = 16;
        let f = |x: f64| 1.0 + (3.0 * x).cos() - 0.5 * (5.0 * x).sin();
        let vals: Vec<f64> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        for x in [0.1, 1.3, 4.0, 2.0 * PI / 16.0] {
            let w = trig_weights(n, x);
            let g: f64 = w.iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((g - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn stochastic_at_zero() {
        let fg = FullGrid::new(&wall(0.0, Reflection::Specular), 32, 8, 8, FULL_CAP).unwrap();
        let r = fg.leading(Complex64::new(0.0, 0.0), 1e-12, 2000);
        assert!((r.value - 1.0).norm() < 1e-10);
        assert!(r.vector.iter().all(|z| z.re > 0.0));
        let psi = vec![Complex64::new(1.0, 0.0); fg.len()];
        assert!((fg.mass(&fg.apply(Complex64::new(0.0, 0.0), &psi)) - fg.mass(&psi)).abs() < 1e-12);
    }

    #[test]
    fn fourier_blocks_match_nodal_apply() {
        for (alpha, refl) in [(0.0, Reflection::Specular), (0.5, Reflection::Specular), (0.5, Reflection::BounceBack)] {
            let fg = FullGrid::new(&wall(alpha, refl), 16, 6, 6, FULL_CAP).unwrap();
            let lam = Complex64::new(0.3, 0.8);
            let m = 3i64;
            let blk = fg.fourier_block(m, lam).unwrap();
            let hat: Vec<Complex64> = (0..36).map(|k| Complex64::new(1.0 + (k as f64).sin(), 0.2 * k as f64)).collect();
            let mut psi = vec![Complex64::new(0.0, 0.0); fg.len()];
            for i in 0..16 {
                let ph = Complex64::from_polar(1.0, m as f64 * 2.0 * PI * i as f64 / 16.0);
                for k in 0..36 {
                    psi[i * 36 + k] = ph * hat[k];
                }
            }
            let out = fg.apply(lam, &psi);
            let want = &blk * nalgebra::DVector::from_column_slice(&hat);
            for i in 0..16 {
                let ph = Complex64::from_polar(1.0, m as f64 * 2.0 * PI * i as f64 / 16.0);
                for k in 0..36 {
                    assert!((out[i * 36 + k] - ph * want[k]).norm() < 1e-10, "alpha {alpha}");
                }
            }
        }
    }

    #[test]
    fn contraction_for_positive_real_part() {
        let fg = FullGrid::new(&wall(0.5, Reflection::Specular), 16, 6, 6, FULL_CAP).unwrap();
        for lam in [Complex64::new(0.1, 0.0), Complex64::new(0.2, 3.0)] {
            let sp = fg.fourier_spectrum(lam, 8).unwrap();
            assert!(sp.iter().all(|(_, z)| z.norm() < 1.0));
        }
    }

    #[test]
    fn memory_guard() {
        assert!(matches!(FullGrid::new(&wall(0.0, Reflection::Specular), 64, 64, 64, 1000), Err(Error::TooLarge { .. })));
    }
}
