//! Discretized boundary operators and their spectra.

mod decay;
mod disc;
mod eigen;
mod full;
mod invariant;
mod resolvent;
mod scan;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub use decay::{decay_bound_n2, tail_check, FilonTransform, TailCheck};
pub use disc::{Discretization, BOUNDARY_CAP, DENSE_CAP};
pub use eigen::{eigenvalues, power_iteration, PowerResult};
pub use full::{FullGrid, FULL_CAP};
pub use invariant::InvariantDensity;
pub use resolvent::{resolvent_term, truncated_kernel_norm, ChordQuadrature, Observable};
pub use scan::{complex_scan, lipschitz_threshold, polish_root, real_scan, FourierSpectrum, RealScan, Root, ScanCell, ScanRect, ScanSources, SpectralScan, Spectrum};

/// Dense kernel operator: (A u)_i = sum_j A_ij s_j u_j with source weights s.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOperator {
    pub target_weights: Vec<f64>,
    pub source_weights: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl KernelOperator {
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_iterator(u.len(), u.iter().zip(&self.source_weights).map(|(z, w)| z * *w));
        (&self.matrix * v).as_slice().to_vec()
    }

    /// Matrix of the action on nodal values.
    pub fn nodal(&self) -> DMatrix<Complex64> {
        let mut m = self.matrix.clone();
        for (j, w) in self.source_weights.iter().enumerate() {
            m.column_mut(j).scale_mut(*w);
        }
        m
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { matrix: self.matrix.map(|z| z * c), ..self.clone() }
    }
}

/// sup over source nodes of the target-measure integral of |kernel|.
pub fn operator_norm_l1(op: &KernelOperator) -> f64 {
    (0..op.matrix.ncols())
        .map(|j| (0..op.matrix.nrows()).map(|i| op.matrix[(i, j)].norm() * op.target_weights[i]).sum::<f64>())
        .fold(0.0, f64::max)
}
