//! Log-linear decay-rate fits.

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Magnitude of the fitted slope of log d.
    pub rate: f64,
    pub intercept: f64,
    /// RMS residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Least squares on (t, log d) over `window`, dropping points with
/// d <= 3 * floor (floor may be empty for no trimming).
pub fn fit_decay_rate(ts: &[f64], ds: &[f64], window: (f64, f64), floor: &[f64]) -> Result<DecayFit> {
    if ts.len() != ds.len() || (!floor.is_empty() && floor.len() != ts.len()) {
        return domain("series lengths differ");
    }
    let pts: Vec<(f64, f64)> = (0..ts.len())
        .filter(|&i| ts[i] >= window.0 && ts[i] <= window.1)
        .filter(|&i| ds[i] > 0.0 && (floor.is_empty() || ds[i] > 3.0 * floor[i]))
        .map(|i| (ts[i], ds[i].ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!("{} usable points, need 4", pts.len())));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if !(stt > 0.0) {
        return Err(Error::InsufficientData("all points share one time".into()));
    }
    let slope = sty / stt;
    let intercept = my - slope * mt;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { rate: -slope, intercept, residual: (rss / n).sqrt(), points: pts.len() })
}
