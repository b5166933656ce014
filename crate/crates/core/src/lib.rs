//! Numerical toolkit for 2×2 canonical systems `JY' = zHY`: fundamental
//! solutions, Weyl-Titchmarsh m-functions, spectral functions, the structural
//! transforms between strings, systems with potential and canonical systems,
//! and verifiers for high-energy asymptotics of m.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod numerics;
pub mod propagator;
pub mod spectral;
pub mod transforms;
pub mod weyl;

pub use error::{Error, Result};
