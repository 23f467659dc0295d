//! Exact and floating-point machinery for the local equivariant index density
//! of sub-signature operators.
//!
//! The layers build on each other: [`scalar`] rings, the bigraded Clifford
//! algebra in [`blade`], its matrix model in [`matrix_rep`], characteristic
//! forms in [`forms`], and the two sides of the density identity in
//! [`density`]. [`mehler`] checks the harmonic-oscillator heat kernel against
//! a finite-difference solver. [`suites`] bundles the randomized checks
//! into reproducible JSON reports.

pub mod blade;
pub mod config;
pub mod density;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod matrix_rep;
pub mod mehler;
pub mod random;
pub mod scalar;
pub mod suites;

pub use error::{Error, Result};
