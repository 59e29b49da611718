//! Finite-element laboratory for the mixed Dirichlet–Neumann (Zaremba)
//! eigenvalue problem on the unit disk.

pub mod geometry;
pub mod mesh;
pub mod sparse;
pub mod cholesky;
pub mod fem;
pub mod eig;
pub mod analysis;
pub mod bessel;
pub mod plot;
pub mod experiments;
