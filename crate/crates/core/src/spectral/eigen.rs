//! Dense eigenvalues and power iteration.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// All eigenvalues of a small dense complex matrix.
///
/// Shifted QR can stall on matrices with exact cyclic symmetry; in that
/// case the matrix is conjugated by a fixed pseudo-random unitary, which
/// changes the Hessenberg form but not the spectrum, and QR is retried.
/// The last resort deflates at a relative 1e-12 instead of 1e-15.
pub fn eigenvalues(m: DMatrix<Complex64>, at: Complex64) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric(format!("non-finite operator entries at lambda = {at}")));
    }
    if let Some(ev) = schur_eigenvalues(m.clone(), 1e-15) {
        return Ok(ev);
    }
    for seed in 1..=3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let q = g.qr().q();
        if let Some(ev) = schur_eigenvalues(q.adjoint() * &m * q, 1e-15) {
            return Ok(ev);
        }
    }
    if let Some(ev) = schur_eigenvalues(m, 1e-12) {
        return Ok(ev);
    }
    Err(Error::NoConvergence(at.to_string()))
}

fn schur_eigenvalues(m: DMatrix<Complex64>, eps: f64) -> Option<Vec<Complex64>> {
    let n = m.nrows();
    let s = Schur::try_new(m, eps, 100 * n.max(10))?;
    Some(s.eigenvalues()?.iter().copied().collect())
}

#[derive(Debug, Clone)]
pub struct PowerResult {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    /// |A x - value x| / |A x| in the supplied norm at exit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn power_plain(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    norm: &dyn Fn(&[Complex64]) -> f64,
    x0: Vec<Complex64>,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> PowerResult {
    let scale = |x: &mut Vec<Complex64>| {
        let s = norm(x);
        if s > 0.0 {
            for z in x.iter_mut() {
                *z /= s;
            }
        }
    };
    let step = |x: &[Complex64]| -> Vec<Complex64> {
        let mut y = apply(x);
        if shift != 0.0 {
            for (a, b) in y.iter_mut().zip(x) {
                *a = (*a + b * shift) / (1.0 + shift);
            }
        }
        y
    };
    let mut x = x0;
    scale(&mut x);
    let mut value = Complex64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let y = step(&x);
        // Rayleigh-type quotient against the current iterate
        let num: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = x.iter().map(|a| a.norm_sqr()).sum();
        value = num / den;
        let r: Vec<Complex64> = y.iter().zip(&x).map(|(b, a)| b - a * value).collect();
        let ny = norm(&y);
        residual = if ny > 0.0 { norm(&r) / ny } else { 0.0 };
        x = y;
        scale(&mut x);
        if residual < tol {
            let value = value * (1.0 + shift) - shift;
            return PowerResult { value, vector: x, residual, iterations: it, converged: true };
        }
    }
    PowerResult { value: value * (1.0 + shift) - shift, vector: x, residual, iterations: max_iter, converged: false }
}

/// Leading eigenpair by power iteration; if that stalls, retries on the
/// shifted operator (A + I) / 2, which separates eigenvalues of modulus one.
pub fn power_iteration(
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    norm: &dyn Fn(&[Complex64]) -> f64,
    x0: Vec<Complex64>,
    tol: f64,
    max_iter: usize,
) -> PowerResult {
    let first = power_plain(apply, norm, x0.clone(), 0.0, tol, max_iter);
    if first.converged {
        return first;
    }
    let second = power_plain(apply, norm, first.vector.clone(), 1.0, tol, 2 * max_iter);
    if second.converged || second.residual < first.residual {
        second
    } else {
        first
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn cyclic_permutation_spectrum() {
        // roots of unity; the real Schur path stalls on this matrix
        let n = 4;
        let m = DMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { c(1.0) } else { c(0.0) });
        let mut ev = eigenvalues(m, c(0.0)).unwrap();
        ev.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        for z in &ev {
            assert!((z.norm() - 1.0).abs() < 1e-12);
            assert!((z.powu(4) - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn power_finds_stochastic_eigenvalue() {
        let m = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.5, 0.4, 0.2, 0.3, 0.5]).map(c);
        let apply = |x: &[Complex64]| (&m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
        let norm = |x: &[Complex64]| x.iter().map(|z| z.norm()).sum::<f64>();
        let r = power_iteration(&apply, &norm, vec![c(1.0); 3], 1e-13, 1000);
        assert!(r.converged);
        assert!((r.value - c(1.0)).norm() < 1e-12);
        assert!(r.vector.iter().all(|z| z.re > 0.0));
    }

    #[test]
    fn shift_rescues_periodic_chain() {
        // eigenvalues 1 and -1: plain iteration oscillates
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).map(c);
        let apply = |x: &[Complex64]| (&m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec();
        let norm = |x: &[Complex64]| x.iter().map(|z| z.norm()).sum::<f64>();
        let r = power_iteration(&apply, &norm, vec![c(1.0), c(0.0)], 1e-12, 200);
        assert!(r.converged);
        assert!((r.value - c(1.0)).norm() < 1e-10);
    }
}
