//! Numerical laboratory for the inhomogeneous T-Q relation of the periodic
//! XXX spin-1/2 chain.
//!
//! The crate builds the transfer-matrix family exactly on the 2^N-dimensional
//! Hilbert space, diagonalizes it as an independent reference, solves the
//! Bethe equations attached to the inhomogeneous T-Q relation, reconstructs
//! Q-polynomials from exact eigenvalues, and constructs Bethe states.

// tests use the printed twist -0.69315i, which clippy reads as ln 2
#![cfg_attr(test, allow(clippy::approx_constant))]

pub mod cli;
pub mod eigenstate;
pub mod error;
pub mod identities;
pub mod lattice;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod reconstruct;
pub mod solver;
pub mod tq;

pub use error::{Result, TqError};
pub use lattice::{ChainSpec, MonodromyBlocks, OperatorMatrix, RotationConvention};
pub use poly::ComplexPoly;

pub use num_complex::Complex64;
