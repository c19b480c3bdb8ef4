//! Gauss-Legendre rules and a couple of composite helpers.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// A quadrature rule as parallel node/weight vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn gauss(a: f64, b: f64, n: usize) -> Rule {
        let (x, w) = gauss_legendre(n);
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        Rule {
            nodes: x.iter().map(|t| c + h * t).collect(),
            weights: w.iter().map(|t| h * t).collect(),
        }
    }

    /// `panels` equal panels, `order` Gauss nodes each.
    pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> Rule {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (t, wt) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (t + 1.0));
                weights.push(0.5 * h * wt);
            }
        }
        Rule { nodes, weights }
    }

    /// Composite rule with panels refined geometrically toward both ends.
    /// Useful when the integrand is smooth inside but has endpoint kinks or
    /// weak singularities.
    pub fn graded(a: f64, b: f64, levels: usize, order: usize) -> Rule {
        let mut breaks = vec![0.0];
        let mut s: f64 = 0.5;
        for _ in 0..levels {
            s *= 0.5;
        }
        let mut t = s;
        breaks.push(t);
        while t < 0.5 {
            t = (2.0 * t).min(0.5);
            breaks.push(t);
        }
        let mut all: Vec<f64> = breaks.clone();
        for &bk in breaks.iter().rev().skip(1) {
            all.push(1.0 - bk);
        }
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for win in all.windows(2) {
            let lo = a + (b - a) * win[0];
            let hi = a + (b - a) * win[1];
            let h = hi - lo;
            for (tt, wt) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (tt + 1.0));
                weights.push(0.5 * h * wt);
            }
        }
        Rule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in 1..12 {
            let r = Rule::gauss(-1.0, 2.0, n);
            for p in 0..(2 * n) {
                let got = r.integrate(|x| x.powi(p as i32));
                let want = (2f64.powi(p as i32 + 1) - (-1f64).powi(p as i32 + 1)) / (p as f64 + 1.0);
                assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn weights_sum_to_length() {
        let r = Rule::gauss(0.0, 1.0, 64);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn graded_handles_sqrt_endpoint() {
        let r = Rule::graded(0.0, 1.0, 30, 12);
        let got = r.integrate(|x| x.sqrt() * (1.0 - x).sqrt());
        assert!((got - PI / 8.0).abs() < 1e-12);
    }

    #[test]
    fn composite_smooth() {
        let r = Rule::composite(0.0, PI, 8, 8);
        assert!((r.integrate(f64::sin) - 2.0).abs() < 1e-14);
    }
}
