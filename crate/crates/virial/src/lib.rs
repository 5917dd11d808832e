//! Numerical toolkit for virial identities and the method of multipliers
//! in spectral theory.
//!
//! The crate assembles finite-difference Schrödinger, Pauli, Dirac and Robin
//! operators on truncated cell-centered lattices, evaluates multiplier and
//! virial identities on eigen-candidates, computes the discrete constants in
//! the functional inequalities behind absence-of-eigenvalue certificates,
//! and verifies uniform weighted resolvent bounds with explicit constants.

pub mod error;
pub mod lattice;
pub mod identities;
pub mod operators;
pub mod sparsekit;

pub use error::{Result, VirialError};
pub use lattice::C64;
