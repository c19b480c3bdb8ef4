//! Nystrom discretization of the isotropic boundary operator W(lambda).
//!
//! Nodes are (boundary node i, speed node a) with measure
//! mu_ia = w_i kappa_d rho_a^d w(rho_a) q_a. For kernels that ignore the
//! incoming speed, W(lambda) = L P factors through boundary functions, and
//! its nonzero spectrum is that of the N x N matrix
//! B_ij = w_j J_ij sum_b rho_b^d w(rho_b) q_b k(x_j, rho_b) exp(-lambda d_ij / rho_b).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::eigen::{eigenvalues, power_iteration, PowerResult};
use super::KernelOperator;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, Shape};
use crate::quad::Rule;
use crate::velocity::kappa;
use crate::wall::DiffuseKernel;

/// Largest boundary grid the dense assembly accepts.
pub const BOUNDARY_CAP: usize = 4096;
/// Largest (boundary x speed) node count for an explicit dense W.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: BoundaryGrid,
    pub speeds: Rule,
    pub kernel: DiffuseKernel,
    dim: usize,
    /// J with the diagonal filled by mass compensation, row = target.
    jt: Vec<f64>,
    dist: Vec<f64>,
    /// k(x_j, rho_b), renormalized on the speed rule.
    kv: Vec<f64>,
    /// rho_b^d w(rho_b) q_b
    sm: Vec<f64>,
    circulant: bool,
}

fn cexp(z: Complex64) -> Complex64 {
    z.exp()
}

impl Discretization {
    pub fn new(kernel: &DiffuseKernel, boundary_nodes: usize, speed_nodes: usize) -> Result<Self> {
        if kernel.depends_on_incoming() {
            return Err(Error::Assembly("the reduced operator needs a kernel independent of the incoming speed".into()));
        }
        if boundary_nodes > BOUNDARY_CAP {
            return Err(Error::TooLarge { nodes: boundary_nodes, cap: BOUNDARY_CAP });
        }
        if speed_nodes == 0 {
            return Err(Error::Domain("need at least one speed node".into()));
        }
        let dom = kernel.domain().clone();
        let dim = dom.dim();
        let grid = dom.boundary_grid(boundary_nodes)?;
        let n = grid.len();
        let sp = &kernel.speed;
        let speeds = Rule::gauss(sp.r0, sp.rmax, speed_nodes);
        let kap = kappa(dim);

        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<(Vec<f64>, Vec<f64>)> {
                let mut jr = vec![0.0; n];
                let mut dr = vec![0.0; n];
                for j in 0..n {
                    if i != j {
                        jr[j] = dom.jacobian(grid.points[i], grid.points[j]).map_err(|e| Error::Assembly(e.to_string()))?;
                        dr[j] = (grid.points[i] - grid.points[j]).norm();
                    }
                }
                Ok((jr, dr))
            })
            .collect::<Result<_>>()?;
        let mut jt = Vec::with_capacity(n * n);
        let mut dist = Vec::with_capacity(n * n);
        for (jr, dr) in rows {
            jt.extend(jr);
            dist.extend(dr);
        }
        // the diagonal carries whatever mass the off-diagonal sum misses
        for j in 0..n {
            let s: f64 = (0..n).filter(|&i| i != j).map(|i| grid.weights[i] * jt[i * n + j]).sum();
            jt[j * n + j] = (kap - s) / grid.weights[j];
        }

        let sm: Vec<f64> = speeds
            .nodes
            .iter()
            .zip(&speeds.weights)
            .map(|(&r, &q)| r.powi(dim as i32) * sp.weight.eval(r) * q)
            .collect();
        let ns = speeds.len();
        let mut kv = vec![0.0; n * ns];
        for j in 0..n {
            let x = grid.points[j];
            let mut norm = 0.0;
            for b in 0..ns {
                let r = speeds.nodes[b];
                kv[j * ns + b] = kernel.eval(x, r, r)?;
                norm += kap * sm[b] * kv[j * ns + b];
            }
            if !(norm > 0.0) {
                return Err(Error::DegenerateKernel(format!("kernel vanishes on the speed grid at node {j}")));
            }
            for b in 0..ns {
                kv[j * ns + b] /= norm;
            }
        }
        let circulant = matches!(dom.shape(), Shape::Disk { .. }) && kernel.is_uniform_in_x();
        Ok(Self { grid, speeds, kernel: kernel.clone(), dim, jt, dist, kv, sm, circulant })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn speed_len(&self) -> usize {
        self.speeds.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jacobian(&self, i: usize, j: usize) -> f64 {
        self.jt[i * self.len() + j]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    pub fn kernel_value(&self, j: usize, b: usize) -> f64 {
        self.kv[j * self.speed_len() + b]
    }

    /// rho_b^d w(rho_b) q_b
    pub fn speed_factor(&self, b: usize) -> f64 {
        self.sm[b]
    }

    /// Node measure mu_ia.
    pub fn measure(&self, i: usize, a: usize) -> f64 {
        self.grid.weights[i] * kappa(self.dim) * self.sm[a]
    }

    /// E_j(tau) = sum_b rho_b^d w q_b k(x_j, rho_b) exp(-tau / rho_b).
    pub fn emission_transform(&self, j: usize, tau: Complex64) -> Complex64 {
        let ns = self.speed_len();
        (0..ns).map(|b| cexp(-tau / self.speeds.nodes[b]) * (self.sm[b] * self.kv[j * ns + b])).sum()
    }

    fn b_row(&self, i: usize, lambda: Complex64) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|j| self.emission_transform(j, lambda * self.dist[i * n + j]) * (self.grid.weights[j] * self.jt[i * n + j]))
            .collect()
    }

    /// The reduced N x N matrix B(lambda).
    pub fn b_matrix(&self, lambda: Complex64) -> DMatrix<Complex64> {
        let n = self.len();
        let rows: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(|i| self.b_row(i, lambda)).collect();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    /// Eigenvalues of B(lambda); disks with x-independent kernels use the
    /// circulant structure of the uniform grid.
    pub fn eigenvalues(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        if self.circulant {
            let n = self.len();
            let row = self.b_row(0, lambda);
            let tw: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
            let ev: Vec<Complex64> = (0..n).map(|m| (0..n).map(|j| row[j] * tw[(j * m) % n]).sum()).collect();
            if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Numeric(format!("non-finite spectrum at lambda = {lambda}")));
            }
            return Ok(ev);
        }
        eigenvalues(self.b_matrix(lambda), lambda)
    }

    /// Weighted L1 norm of a boundary function: sum_i w_i |phi_i|.
    pub fn boundary_mass(&self, phi: &[Complex64]) -> f64 {
        phi.iter().zip(&self.grid.weights).map(|(z, w)| w * z.norm()).sum()
    }

    /// Leading eigenpair of B(lambda) by power iteration.
    pub fn leading(&self, lambda: Complex64, tol: f64, max_iter: usize) -> PowerResult {
        let b = self.b_matrix(lambda);
        let n = self.len();
        let apply = |x: &[Complex64]| (&b * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
        let norm = |x: &[Complex64]| self.boundary_mass(x);
        power_iteration(&apply, &norm, vec![Complex64::new(1.0, 0.0); n], tol, max_iter)
    }

    /// Structured application of W(lambda) to u indexed [i * Ns + a].
    pub fn w_apply(&self, lambda: Complex64, u: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let ns = self.speed_len();
        let t: Vec<Complex64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let c = self.grid.weights[j] * self.jt[i * n + j];
                    let d = self.dist[i * n + j];
                    for b in 0..ns {
                        s += cexp(-lambda * d / self.speeds.nodes[b]) * (c * self.sm[b]) * u[j * ns + b];
                    }
                }
                s
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n * ns];
        for i in 0..n {
            for a in 0..ns {
                out[i * ns + a] = t[i] * self.kv[i * ns + a];
            }
        }
        out
    }

    /// Exact L1 operator norm of the discrete W(lambda).
    pub fn w_norm_l1(&self, lambda: Complex64) -> f64 {
        let n = self.len();
        let ns = self.speed_len();
        let kap = kappa(self.dim);
        let out_mass: Vec<f64> = (0..n).map(|i| (0..ns).map(|a| self.kv[i * ns + a] * self.sm[a]).sum::<f64>() * kap).collect();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let mut best: f64 = 0.0;
                for b in 0..ns {
                    let mut s = 0.0;
                    for i in 0..n {
                        let e = (-lambda.re * self.dist[i * n + j] / self.speeds.nodes[b]).exp();
                        s += self.grid.weights[i] * self.jt[i * n + j].abs() * e * out_mass[i];
                    }
                    best = best.max(s / kap);
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    /// W(lambda) as an explicit dense kernel operator (small grids only).
    pub fn w_dense(&self, lambda: Complex64) -> Result<KernelOperator> {
        let n = self.len();
        let ns = self.speed_len();
        let m = n * ns;
        if m > DENSE_CAP {
            return Err(Error::TooLarge { nodes: m, cap: DENSE_CAP });
        }
        let kap = kappa(self.dim);
        let weights: Vec<f64> = (0..m).map(|k| self.measure(k / ns, k % ns)).collect();
        let matrix = DMatrix::from_fn(m, m, |r, c| {
            let (i, a) = (r / ns, r % ns);
            let (j, b) = (c / ns, c % ns);
            let e = cexp(-lambda * self.dist[i * n + j] / self.speeds.nodes[b]);
            e * (self.kv[i * ns + a] * self.jt[i * n + j] / kap)
        });
        Ok(KernelOperator { target_weights: weights.clone(), source_weights: weights, matrix })
    }

    /// Lift a boundary function to the isotropic density k(x_i, rho_a) phi_i.
    pub fn lift(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let ns = self.speed_len();
        let mut u = Vec::with_capacity(phi.len() * ns);
        for (i, p) in phi.iter().enumerate() {
            for a in 0..ns {
                u.push(p * self.kv[i * ns + a]);
            }
        }
        u
    }

    /// L1 mass of u on the (boundary x speed) grid.
    pub fn mass(&self, u: &[Complex64]) -> f64 {
        let ns = self.speed_len();
        u.iter().enumerate().map(|(k, z)| self.measure(k / ns, k % ns) * z.norm()).sum()
    }
}
