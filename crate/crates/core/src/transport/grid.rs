//! Symmetry-adapted phase-space histograms on disks and balls.
//!
//! Cells are products of equal-volume radial shells, speed bins, bins in
//! mu = cos(angle(x, v)) and optional azimuthal sectors of the position.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::geometry::{Domain, Shape};
use crate::quad::Rule;
use crate::velocity::Weight;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    dim: usize,
    radius: f64,
    speed_edges: Vec<f64>,
    nr: usize,
    nmu: usize,
    nsect: usize,
    measures: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub masses: Vec<f64>,
    /// Reference measure dx m(dv) of each cell.
    pub measures: Vec<f64>,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn density(&self) -> Vec<f64> {
        self.masses.iter().zip(&self.measures).map(|(m, c)| m / c).collect()
    }
}

impl PhaseGrid {
    /// `speed_edges` must be increasing and span the speed annulus.
    pub fn new(dom: &Domain, weight: Weight, speed_edges: Vec<f64>, nr: usize, nmu: usize, nsect: usize) -> Result<Self> {
        let radius = match dom.shape() {
            Shape::Disk { radius } | Shape::Ball { radius } => radius,
            Shape::Ellipse { .. } => return domain("phase grids need a disk or a ball"),
        };
        let dim = dom.dim();
        if speed_edges.len() < 2 || speed_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("speed edges must be increasing with at least two entries");
        }
        if nr == 0 || nmu == 0 || nsect == 0 {
            return domain("every grid axis needs at least one bin");
        }
        if dim == 3 && nsect != 1 {
            return domain("azimuthal sectors are only supported in the plane");
        }
        let d = dim as i32;
        let space = dom.volume() / (nr * nsect) as f64;
        let speed: Vec<f64> = speed_edges
            .windows(2)
            .map(|w| Rule::gauss(w[0], w[1], 16).integrate(|r| r.powi(d - 1) * weight.eval(r)))
            .collect();
        let dir: Vec<f64> = (0..nmu)
            .map(|k| {
                let (a, b) = mu_edges(nmu, k);
                if dim == 2 {
                    2.0 * (a.acos() - b.acos())
                } else {
                    2.0 * PI * (b - a)
                }
            })
            .collect();
        let mut g = Self { dim, radius, speed_edges, nr, nmu, nsect, measures: vec![] };
        let mut measures = vec![0.0; g.cells()];
        for ir in 0..nr {
            for (ib, s) in speed.iter().enumerate() {
                for (im, a) in dir.iter().enumerate() {
                    for is in 0..nsect {
                        measures[g.index(ir, ib, im, is)] = space * s * a;
                    }
                }
            }
        }
        g.measures = measures;
        Ok(g)
    }

    pub fn cells(&self) -> usize {
        self.nr * (self.speed_edges.len() - 1) * self.nmu * self.nsect
    }

    fn index(&self, ir: usize, ib: usize, im: usize, is: usize) -> usize {
        ((ir * (self.speed_edges.len() - 1) + ib) * self.nmu + im) * self.nsect + is
    }

    fn r_edge(&self, k: usize) -> f64 {
        self.radius * (k as f64 / self.nr as f64).powf(1.0 / self.dim as f64)
    }

    pub fn cell_of(&self, x: Vec3, v: Vec3) -> Result<usize> {
        let r = x.norm();
        let rho = v.norm();
        let nb = self.speed_edges.len() - 1;
        if r > self.radius * (1.0 + 1e-9) {
            return Err(Error::Accounting(format!("position {x:?} outside the grid")));
        }
        let (lo, hi) = (self.speed_edges[0], self.speed_edges[nb]);
        if rho < lo * (1.0 - 1e-12) || rho > hi * (1.0 + 1e-12) {
            return Err(Error::Accounting(format!("speed {rho} outside the grid [{lo}, {hi}]")));
        }
        let u = (r / self.radius).powi(self.dim as i32);
        let ir = ((u * self.nr as f64) as usize).min(self.nr - 1);
        let ib = (self.speed_edges.partition_point(|&e| e <= rho).max(1) - 1).min(nb - 1);
        let mu = if r > 0.0 { (x.dot(v) / (r * rho)).clamp(-1.0, 1.0) } else { 0.0 };
        let im = (((mu + 1.0) * 0.5 * self.nmu as f64) as usize).min(self.nmu - 1);
        let is = if self.nsect > 1 {
            let a = x.y.atan2(x.x).rem_euclid(2.0 * PI);
            ((a / (2.0 * PI) * self.nsect as f64) as usize).min(self.nsect - 1)
        } else {
            0
        };
        Ok(self.index(ir, ib, im, is))
    }

    /// Same histogram with every `factor` neighbouring sectors merged.
    pub fn merge_sectors(&self, h: &Histogram, factor: usize) -> Result<Histogram> {
        if factor == 0 || !self.nsect.is_multiple_of(factor) {
            return domain(format!("cannot merge {} sectors in groups of {factor}", self.nsect));
        }
        if h.masses.len() != self.cells() {
            return domain("histogram does not belong to this grid");
        }
        let n = self.cells() / factor;
        let mut out = Histogram { masses: vec![0.0; n], measures: vec![0.0; n] };
        for k in 0..self.cells() {
            let (outer, is) = (k / self.nsect, k % self.nsect);
            let j = outer * (self.nsect / factor) + is / factor;
            out.masses[j] += h.masses[k];
            out.measures[j] += h.measures[k];
        }
        Ok(out)
    }

    pub fn empty(&self) -> Histogram {
        Histogram { masses: vec![0.0; self.cells()], measures: self.measures.clone() }
    }

    pub fn histogram(&self, items: impl Iterator<Item = (Vec3, Vec3, f64)>) -> Result<Histogram> {
        let mut h = self.empty();
        for (x, v, w) in items {
            h.masses[self.cell_of(x, v)?] += w;
        }
        Ok(h)
    }

    /// Cell counts scaled by 1/n.
    pub fn from_counts(&self, counts: &[u64], n: u64) -> Result<Histogram> {
        if counts.len() != self.cells() {
            return domain("count vector does not match the grid");
        }
        let mut h = self.empty();
        for (m, &c) in h.masses.iter_mut().zip(counts) {
            *m = c as f64 / n as f64;
        }
        Ok(h)
    }

    /// Cell probabilities of a law that is uniform in x and isotropic in the
    /// direction, with speed CDF `cdf`.
    pub fn isotropic_masses(&self, cdf: impl Fn(f64) -> f64) -> Histogram {
        let space = 1.0 / (self.nr * self.nsect) as f64;
        let mut h = self.empty();
        let nb = self.speed_edges.len() - 1;
        for ir in 0..self.nr {
            for ib in 0..nb {
                let ps = cdf(self.speed_edges[ib + 1]) - cdf(self.speed_edges[ib]);
                for im in 0..self.nmu {
                    let (a, b) = mu_edges(self.nmu, im);
                    let pd = if self.dim == 2 { (a.acos() - b.acos()) / PI } else { 0.5 * (b - a) };
                    for is in 0..self.nsect {
                        h.masses[self.index(ir, ib, im, is)] = space * ps * pd;
                    }
                }
            }
        }
        h
    }

    /// Cell masses of a density `f(x, v)` against dx m(dv), by product
    /// Gauss quadrature of order `order` on every cell axis (planar only).
    pub fn quadrature_masses(&self, weight: Weight, order: usize, f: impl Fn(Vec3, Vec3) -> f64 + Sync) -> Result<Histogram> {
        if self.dim != 2 {
            return domain("quadrature masses are implemented for planar grids");
        }
        let nb = self.speed_edges.len() - 1;
        let cells: Vec<(usize, usize, usize, usize)> = (0..self.nr)
            .flat_map(|ir| (0..nb).flat_map(move |ib| (0..self.nmu).flat_map(move |im| (0..self.nsect).map(move |is| (ir, ib, im, is)))))
            .collect();
        let vals: Vec<f64> = cells
            .par_iter()
            .map(|&(ir, ib, im, is)| {
                let rr = Rule::gauss(self.r_edge(ir), self.r_edge(ir + 1), order);
                let w0 = 2.0 * PI * is as f64 / self.nsect as f64;
                let ang = Rule::gauss(w0, w0 + 2.0 * PI / self.nsect as f64, order);
                let sp = Rule::gauss(self.speed_edges[ib], self.speed_edges[ib + 1], order);
                let (a, b) = mu_edges(self.nmu, im);
                let arms = [Rule::gauss(b.acos(), a.acos(), order), Rule::gauss(-a.acos(), -b.acos(), order)];
                let mut s = 0.0;
                for (&r, &wr) in rr.nodes.iter().zip(&rr.weights) {
                    for (&psi, &wa) in ang.nodes.iter().zip(&ang.weights) {
                        let x = Vec3::xy(r * psi.cos(), r * psi.sin());
                        for (&rho, &wq) in sp.nodes.iter().zip(&sp.weights) {
                            let base = wr * r * wa * wq * rho * weight.eval(rho);
                            for arm in &arms {
                                for (&phi, &wp) in arm.nodes.iter().zip(&arm.weights) {
                                    let v = Vec3::xy((psi + phi).cos(), (psi + phi).sin()) * rho;
                                    s += base * wp * f(x, v);
                                }
                            }
                        }
                    }
                }
                s
            })
            .collect();
        let mut h = self.empty();
        for (&(ir, ib, im, is), v) in cells.iter().zip(vals) {
            h.masses[self.index(ir, ib, im, is)] = v;
        }
        Ok(h)
    }
}

fn mu_edges(nmu: usize, k: usize) -> (f64, f64) {
    (-1.0 + 2.0 * k as f64 / nmu as f64, -1.0 + 2.0 * (k + 1) as f64 / nmu as f64)
}

pub fn l1_distance(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.masses.len() != b.masses.len() || a.measures != b.measures {
        return domain("histograms live on different grids");
    }
    Ok(a.masses.iter().zip(&b.masses).map(|(x, y)| (x - y).abs()).sum())
}

/// Expected L1 distance between an n-sample histogram and its law `p`,
/// from the normal approximation of each cell.
pub fn expected_l1_noise(p: &[f64], n: u64) -> f64 {
    let total: f64 = p.iter().sum();
    p.iter()
        .map(|&m| {
            let q = (m / total).clamp(0.0, 1.0);
            (2.0 * q * (1.0 - q) / (PI * n as f64)).sqrt() * total
        })
        .sum()
}

/// Mean and standard deviation of the L1 distance between multinomial
/// resamples of size `n` and the probability vector `p`.
pub fn bootstrap_l1(p: &[f64], n: u64, reps: usize, seed: u64) -> Result<(f64, f64)> {
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || reps < 2 || n == 0 {
        return domain("bootstrap needs a positive mass vector, n > 0 and at least two replicates");
    }
    let probs: Vec<f64> = p.iter().map(|&m| m / total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut left = n;
        let mut rest = 1.0;
        let mut d = 0.0;
        for &q in &probs {
            let c = if left == 0 || rest <= 0.0 {
                0
            } else {
                let pr = (q / rest).clamp(0.0, 1.0);
                Binomial::new(left, pr).map_err(|e| Error::Numeric(e.to_string()))?.sample(&mut rng)
            };
            left -= c;
            rest -= q;
            d += (c as f64 / n as f64 - q).abs();
        }
        vals.push(d * total);
    }
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    Ok((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nsect: usize) -> PhaseGrid {
        let dom = Domain::disk(1.0).unwrap();
        PhaseGrid::new(&dom, Weight::Power { m: 0.0 }, vec![0.5, 1.0, 3.0], 4, 4, nsect).unwrap()
    }

    #[test]
    fn measures_add_up() {
        let g = grid(3);
        let total: f64 = g.empty().measures.iter().sum();
        // |disk| * |annulus of speeds|
        assert!((total - PI * PI * (9.0 - 0.25)).abs() < 1e-10);
    }

    #[test]
    fn l1_extremes() {
        let g = grid(1);
        let mut a = g.empty();
        let mut b = g.empty();
        a.masses[0] = 1.0;
        b.masses[1] = 1.0;
        assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(l1_distance(&a, &b).unwrap(), 2.0);
        let mut c = g.empty();
        c.masses[0] = 0.5;
        c.masses[1] = 0.5;
        assert_eq!(l1_distance(&a, &c).unwrap(), 1.0);
        assert!(l1_distance(&a, &grid(2).empty()).is_err());
    }

    #[test]
    fn merging_sectors_keeps_totals() {
        let g = grid(4);
        let iso = g.isotropic_masses(|r| (r - 0.5) / 2.5);
        let m = g.merge_sectors(&iso, 2).unwrap();
        assert_eq!(m.masses.len(), g.cells() / 2);
        assert!((m.total() - 1.0).abs() < 1e-12);
        let total: f64 = m.measures.iter().sum();
        assert!((total - PI * PI * (9.0 - 0.25)).abs() < 1e-10);
        // an isotropic law stays uniform across merged sectors
        assert!((m.masses[0] - 2.0 * iso.masses[0]).abs() < 1e-15);
        assert!(g.merge_sectors(&iso, 3).is_err());
    }

    #[test]
    fn point_mass_single_cell() {
        let g = grid(2);
        let h = g.histogram(std::iter::repeat_n((Vec3::xy(0.3, 0.2), Vec3::xy(0.0, 0.7), 0.1), 10)).unwrap();
        assert_eq!(h.masses.iter().filter(|&&m| m > 0.0).count(), 1);
        assert!((h.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outside_points_are_rejected() {
        let g = grid(1);
        assert!(g.cell_of(Vec3::xy(1.1, 0.0), Vec3::xy(1.0, 0.0)).is_err());
        assert!(g.cell_of(Vec3::xy(0.1, 0.0), Vec3::xy(4.0, 0.0)).is_err());
    }

    #[test]
    fn quadrature_agrees_with_isotropic_masses() {
        let g = grid(2);
        let norm = PI * PI * (9.0 - 0.25);
        let q = g.quadrature_masses(Weight::Power { m: 0.0 }, 6, |_, _| 1.0 / norm).unwrap();
        let iso = g.isotropic_masses(|r| (r * r - 0.25) / (9.0 - 0.25));
        assert!(l1_distance(&q, &iso).unwrap() < 1e-10);
    }

    #[test]
    fn bootstrap_matches_normal_noise() {
        let g = grid(1);
        let p = g.isotropic_masses(|r| (r - 0.5) / 2.5);
        let (m, s) = bootstrap_l1(&p.masses, 10_000, 200, 1).unwrap();
        let e = expected_l1_noise(&p.masses, 10_000);
        assert!((m - e).abs() < 0.05 * e + 3.0 * s / (200f64).sqrt(), "{m} {e}");
    }
}
