//! Collisionless kinetic transport in convex domains with diffuse walls:
//! boundary operators, rebound-series Monte Carlo and spectral tools.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod geometry;
pub mod quad;
pub mod spectral;
pub mod transport;
pub mod vec3;
pub mod velocity;
pub mod wall;

pub use error::{Error, Result};
pub use geometry::{BoundaryGrid, Direction, Domain, Shape};
pub use vec3::Vec3;
pub use velocity::{SpeedMeasure, Weight};
pub use wall::{BoundaryField, DiffuseKernel, Profile, Reflection, Wall};
pub use spectral::{Discretization, FullGrid, InvariantDensity, SpectralScan};
pub use transport::{Ensemble, Mode, PhaseGrid, PhaseSampler, Tracker};
