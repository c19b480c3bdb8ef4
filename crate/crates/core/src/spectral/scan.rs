//! Locating lambda with 1 in the spectrum of the boundary operator.
//!
//! Real scans follow the Perron value r(lambda). Complex scans evaluate
//! F(lambda) = min_i |mu_i(lambda) - 1| on a rectangle anchored at 0,
//! flag local minima below a threshold, and polish each flag by a secant
//! iteration on the eigenvalue closest to 1. The rectangle covers
//! Im(lambda) >= im_min only; roots come in conjugate pairs.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Discretization, FullGrid};
use crate::error::{domain, Error, Result};

/// Anything that produces the (nonzero) spectrum of the boundary operator at lambda.
pub trait Spectrum: Sync {
    fn spectrum(&self, lambda: Complex64) -> Result<Vec<Complex64>>;
}

impl Spectrum for Discretization {
    fn spectrum(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        self.eigenvalues(lambda)
    }
}

/// Fourier-block spectrum of the full grid, |m| <= m_max.
#[derive(Debug, Clone, Copy)]
pub struct FourierSpectrum<'a> {
    pub grid: &'a FullGrid,
    pub m_max: i64,
}

impl Spectrum for FourierSpectrum<'_> {
    fn spectrum(&self, lambda: Complex64) -> Result<Vec<Complex64>> {
        Ok(self.grid.fourier_spectrum(lambda, self.m_max)?.into_iter().map(|(_, z)| z).collect())
    }
}

fn nearest_to_one(src: &dyn Spectrum, lambda: Complex64) -> Result<Complex64> {
    let ev = src.spectrum(lambda)?;
    ev.into_iter()
        .min_by(|a, b| (a - 1.0).norm().total_cmp(&(b - 1.0).norm()))
        .ok_or_else(|| Error::Numeric(format!("empty spectrum at lambda = {lambda}")))
}

/// Rectangle in the lambda plane, sampled on a lattice of step 1 / resolution
/// that contains 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// lattice points per unit length
    pub resolution: f64,
}

impl ScanRect {
    pub fn step(&self) -> f64 {
        1.0 / self.resolution
    }

    fn axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
        let a = (lo / h - 1e-9).ceil() as i64;
        let b = (hi / h + 1e-9).floor() as i64;
        (a..=b).map(|k| k as f64 * h).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return domain("scan resolution must be positive");
        }
        if !(self.re_min <= self.re_max && self.im_min <= self.im_max) {
            return domain("empty scan rectangle");
        }
        if !(self.re_min.is_finite() && self.re_max.is_finite() && self.im_min.is_finite() && self.im_max.is_finite()) {
            return domain("scan rectangle must be finite");
        }
        Ok(())
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.re_min - margin && z.re <= self.re_max + margin && z.im >= self.im_min - margin && z.im <= self.im_max + margin
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanCell {
    pub lambda: Complex64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub lambda: Complex64,
    /// |mu - 1| at the polished root
    pub residual: f64,
    /// same root on the refined grid
    pub refined: Option<Complex64>,
    pub delta: Option<f64>,
    /// first-order shift of the root between the half and the working grid
    pub estimate: Option<f64>,
    /// delta < 10 * estimate
    pub stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScan {
    pub rect: ScanRect,
    pub field: Vec<ScanCell>,
    pub flagged: Vec<Complex64>,
    pub threshold: f64,
    pub roots: Vec<Root>,
    /// width of the root-free strip left of the imaginary axis
    pub gap: Option<f64>,
    pub gap_delta: Option<f64>,
}

impl SpectralScan {
    pub fn has_root_at_zero(&self, tol: f64) -> bool {
        self.roots.iter().any(|r| r.lambda.norm() <= tol)
    }

    pub fn nonzero_roots(&self, tol: f64) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(move |r| r.lambda.norm() > tol)
    }
}

/// Grids used by a complex scan: `work` drives the field and the polish,
/// `half` and `refined` (coarser and finer versions) give error bars.
pub struct ScanSources<'a> {
    pub work: &'a dyn Spectrum,
    pub half: Option<&'a dyn Spectrum>,
    pub refined: Option<&'a dyn Spectrum>,
}

/// Default flag threshold: a Lipschitz bound of lambda -> W(lambda) in L1
/// over the rectangle, times the lattice step.
pub fn lipschitz_threshold(rect: &ScanRect, diameter: f64, r0: f64) -> f64 {
    let l = diameter / r0 * ((-rect.re_min).max(0.0) * diameter / r0).exp();
    l * rect.step()
}

/// Secant iteration on mu(lambda) - 1 for the eigenvalue closest to 1.
pub fn polish_root(src: &dyn Spectrum, start: Complex64, h: f64) -> Result<(Complex64, f64)> {
    let mut l0 = start;
    let mut g0 = nearest_to_one(src, l0)? - 1.0;
    if g0.norm() < 1e-13 {
        return Ok((l0, g0.norm()));
    }
    let mut l1 = start + Complex64::new(h, h) * 0.125;
    let mut g1 = nearest_to_one(src, l1)? - 1.0;
    for _ in 0..60 {
        if g1.norm() < 1e-13 {
            break;
        }
        let den = g1 - g0;
        if den.norm() == 0.0 {
            break;
        }
        let step = g1 * (l1 - l0) / den;
        if !(step.re.is_finite() && step.im.is_finite()) || (l1 - step - start).norm() > 4.0 * h {
            // wandered off the flagged cell
            return Ok((l1, f64::INFINITY));
        }
        l0 = l1;
        g0 = g1;
        l1 -= step;
        g1 = nearest_to_one(src, l1)? - 1.0;
        if step.norm() < 1e-14 * (1.0 + l1.norm()) {
            break;
        }
    }
    Ok((l1, g1.norm()))
}

fn local_minima(re: &[f64], im: &[f64], vals: &[f64], threshold: f64) -> Vec<usize> {
    let (nr, ni) = (re.len(), im.len());
    let mut out = Vec::new();
    for a in 0..nr {
        for b in 0..ni {
            let k = a * ni + b;
            let v = vals[k];
            if !(v < threshold) {
                continue;
            }
            let mut min = true;
            for da in -1i64..=1 {
                for db in -1i64..=1 {
                    if da == 0 && db == 0 {
                        continue;
                    }
                    let (x, y) = (a as i64 + da, b as i64 + db);
                    if x < 0 || y < 0 || x >= nr as i64 || y >= ni as i64 {
                        continue;
                    }
                    // ties go to the first lattice point in scan order
                    let kk = x as usize * ni + y as usize;
                    if vals[kk] < v || (vals[kk] == v && kk < k) {
                        min = false;
                    }
                }
            }
            if min {
                out.push(k);
            }
        }
    }
    out
}

/// Complex scan with flagging, secant polish and refinement deltas.
pub fn complex_scan(src: &ScanSources, rect: ScanRect, threshold: f64) -> Result<SpectralScan> {
    rect.validate()?;
    let h = rect.step();
    let re = ScanRect::axis(rect.re_min, rect.re_max, h);
    let im = ScanRect::axis(rect.im_min, rect.im_max, h);
    if re.is_empty() || im.is_empty() {
        return domain("scan rectangle contains no lattice points");
    }
    let lambdas: Vec<Complex64> = re.iter().flat_map(|&x| im.iter().map(move |&y| Complex64::new(x, y))).collect();
    let vals: Vec<f64> = lambdas
        .par_iter()
        .map(|&l| Ok((nearest_to_one(src.work, l)? - 1.0).norm()))
        .collect::<Result<_>>()?;
    let field: Vec<ScanCell> = lambdas.iter().zip(&vals).map(|(&lambda, &value)| ScanCell { lambda, value }).collect();
    let flagged: Vec<Complex64> = local_minima(&re, &im, &vals, threshold).into_iter().map(|k| lambdas[k]).collect();

    let polished: Vec<Option<(Complex64, f64)>> = flagged
        .par_iter()
        .map(|&l| -> Result<Option<(Complex64, f64)>> {
            let (z, res) = polish_root(src.work, l, h)?;
            let ok = res < 1e-9 && (z - l).norm() <= 3.0 * h && rect.contains(z, 0.5 * h);
            Ok(ok.then_some((z, res)))
        })
        .collect::<Result<_>>()?;
    let mut found: Vec<(Complex64, f64)> = Vec::new();
    for (z, res) in polished.into_iter().flatten() {
        let z = if z.im.abs() < 1e-9 { Complex64::new(z.re, 0.0) } else { z };
        let z = if z.norm() < 1e-10 { Complex64::new(0.0, 0.0) } else { z };
        if !found.iter().any(|(w, _)| (w - z).norm() < 1e-7 * (1.0 + z.norm())) {
            found.push((z, res));
        }
    }

    let roots: Vec<Root> = found
        .par_iter()
        .map(|&(z, residual)| -> Result<Root> {
            let mut root = Root { lambda: z, residual, refined: None, delta: None, estimate: None, stable: None };
            if let Some(fine) = src.refined {
                let (zf, _) = polish_root(fine, z, h * 1e-3)?;
                root.refined = Some(zf);
                root.delta = Some((zf - z).norm());
            }
            if let Some(half) = src.half {
                // Newton step of the coarser operator at the working root
                let g = nearest_to_one(half, z)? - 1.0;
                let eps = 1e-6 * (1.0 + z.norm());
                let d = (nearest_to_one(src.work, z + eps)? - nearest_to_one(src.work, z)?) / eps;
                let est = if d.norm() > 0.0 { (g / d).norm() } else { f64::INFINITY };
                root.estimate = Some(est.max(1e-10));
            }
            if let (Some(d), Some(e)) = (root.delta, root.estimate) {
                root.stable = Some(d < 10.0 * e);
            }
            Ok(root)
        })
        .collect::<Result<_>>()?;

    let gap_root = roots
        .iter()
        .filter(|r| r.lambda.norm() > 1e-8)
        .min_by(|a, b| a.lambda.re.abs().total_cmp(&b.lambda.re.abs()));
    let gap = gap_root.map(|r| r.lambda.re.abs());
    let gap_delta = gap_root.and_then(|r| r.refined.map(|z| (z.re.abs() - r.lambda.re.abs()).abs()));
    Ok(SpectralScan { rect, field, flagged, threshold, roots, gap, gap_delta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealScan {
    /// (lambda, r(lambda))
    pub points: Vec<(f64, f64)>,
    pub roots: Vec<f64>,
}

/// Perron value of B(lambda) on [a, b] and the roots of r(lambda) = 1.
pub fn real_scan(disc: &Discretization, a: f64, b: f64, points: usize, tol: f64) -> Result<RealScan> {
    if points < 2 || !(a < b) {
        return domain("real scan needs a < b and at least two points");
    }
    let r = |l: f64| -> Result<f64> {
        let p = disc.leading(Complex64::new(l, 0.0), tol, 20_000);
        if !p.converged {
            return Err(Error::NoConvergence(format!("{l}")));
        }
        Ok(p.value.re)
    };
    let xs: Vec<f64> = (0..points).map(|k| a + (b - a) * k as f64 / (points - 1) as f64).collect();
    let ys: Vec<f64> = xs.par_iter().map(|&x| r(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for k in 0..points {
        let f = ys[k] - 1.0;
        if f.abs() < 1e-10 {
            roots.push(xs[k]);
            continue;
        }
        if k + 1 < points {
            let g = ys[k + 1] - 1.0;
            if g.abs() >= 1e-10 && f.signum() != g.signum() {
                let (mut lo, mut hi, mut flo) = (xs[k], xs[k + 1], f);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = r(mid)? - 1.0;
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if fm.signum() == flo.signum() {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-13 {
                        break;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
    }
    Ok(RealScan { points: xs.into_iter().zip(ys).collect(), roots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::velocity::{SpeedMeasure, Weight};
    use crate::wall::{BoundaryField, DiffuseKernel, Profile};

    fn disc(nb: usize) -> Discretization {
        let dom = Domain::disk(1.0).unwrap();
        let sm = SpeedMeasure::new(1.0, 3.0, Weight::Power { m: 0.0 }, 2, 64, 64).unwrap();
        let k = DiffuseKernel::new(Profile::Maxwell { theta: BoundaryField::Constant(1.0) }, &sm, &dom, 4096).unwrap();
        Discretization::new(&k, nb, 32).unwrap()
    }

    #[test]
    fn real_scan_has_single_root_at_zero() {
        let d = disc(64);
        let s = real_scan(&d, -0.2, 1.0, 7, 1e-13).unwrap();
        assert_eq!(s.roots.len(), 1);
        assert!(s.roots[0].abs() < 1e-9);
        // r decreases along the real axis
        assert!(s.points.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn complex_scan_finds_zero_and_nothing_right_of_axis() {
        let d = disc(128);
        let rect = ScanRect { re_min: -0.3, re_max: 0.5, im_min: 0.0, im_max: 2.0, resolution: 10.0 };
        let th = lipschitz_threshold(&rect, 2.0, 1.0);
        let s = complex_scan(&ScanSources { work: &d, half: None, refined: None }, rect, th).unwrap();
        assert!(s.has_root_at_zero(1e-9));
        assert!(s.flagged.iter().all(|z| z.re <= 0.0));
        assert!(s.roots.iter().all(|r| r.lambda.re <= 1e-9));
    }

    #[test]
    fn polish_recovers_a_known_root() {
        let d = disc(128);
        let (z, res) = polish_root(&d, Complex64::new(0.05, 0.02), 0.1).unwrap();
        assert!(z.norm() < 1e-9 && res < 1e-10, "{z} {res}");
    }
}
