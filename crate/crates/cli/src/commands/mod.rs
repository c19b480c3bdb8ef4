pub mod geometry;
pub mod invariant;
pub mod laplace;
pub mod simulate;
pub mod spectrum;
pub mod wall;
