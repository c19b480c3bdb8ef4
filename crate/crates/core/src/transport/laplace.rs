//! Monte Carlo Laplace transform of a single rebound generation.

use rayon::prelude::*;

use super::{Mode, PhaseSampler, Tracker};
use crate::error::{domain, Result};
use crate::quad::Rule;
use crate::vec3::Vec3;
use crate::wall::Wall;

const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Estimate of int_0^inf e^{-lambda t} <g, U_{n+1}(t) f> dt for the unit-mass
/// law f drawn by `sampler`.
///
/// Every particle is followed to its (n+2)-th wall hit; the time spent in
/// generation n+1 is one straight segment, integrated with `order` Gauss
/// nodes.
#[allow(clippy::too_many_arguments)]
pub fn laplace_functional(
    wall: &Wall,
    sampler: &dyn PhaseSampler,
    particles: u64,
    seed: u64,
    n: u32,
    lambda: f64,
    order: usize,
    g: &(dyn Fn(Vec3, Vec3) -> f64 + Sync),
) -> Result<Estimate> {
    if !(lambda > 0.0) {
        return domain("the Laplace functional needs lambda > 0");
    }
    if particles < 2 {
        return domain("need at least two particles");
    }
    let tr = Tracker::new(wall, seed, Mode::Evolve);
    let unit = Rule::gauss(0.0, 1.0, order);
    let chunks = particles.div_ceil(CHUNK);
    // per-chunk (sum, sum of squares), merged in chunk order
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let (mut s, mut s2) = (0.0, 0.0);
            for id in c * CHUNK..((c + 1) * CHUNK).min(particles) {
                let mut p = tr.spawn(sampler, id, 1.0)?;
                while p.rebounds < n + 1 {
                    tr.hit(&mut p)?;
                }
                let (t0, y, v) = (p.clock, p.x, p.v);
                let tau = p.next_hit - t0;
                let seg: f64 = unit
                    .nodes
                    .iter()
                    .zip(&unit.weights)
                    .map(|(&u, &w)| w * (-lambda * u * tau).exp() * g(y + v * (u * tau), v))
                    .sum();
                let val = (-lambda * t0).exp() * seg * tau;
                s += val;
                s2 += val * val;
            }
            Ok((s, s2))
        })
        .collect::<Result<_>>()?;
    let (mut s, mut s2) = (0.0, 0.0);
    for (a, b) in parts {
        s += a;
        s2 += b;
    }
    let nf = particles as f64;
    let mean = s / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(Estimate { mean, stderr: (var / nf).sqrt() })
}
