//! Numerics on the complex projective state space CP(N-1).
//!
//! The crate covers the generalized Fubini-Study geometry of rays in an
//! `N`-level Hilbert space, coset geodesic flows of the vacuum state,
//! state-dependent generator fields and their brackets, a Hermite-spectral
//! representation of the Lorentz-radial Klein-Gordon field, and a
//! fixed-point solver for the geodesically perturbed field equation.

pub mod check;
pub mod cli;
pub mod coset;
pub mod discrepancy;
pub mod dynvars;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod linalg;
pub mod nonlinear_kg;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod scalar_field;
pub mod special;

pub use error::{Error, Result};
