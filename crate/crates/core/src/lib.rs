//! Second-quantized coupled cluster toolkit: Fermi-Dirac algebra, the
//! exponential parameterization of Fock space states, truncation varieties
//! and numerical CC degree computation.

pub mod combinatorics;
pub mod error;
pub mod fd_algebra;
pub mod expparam;
pub mod multipoly;
pub mod truncation;
pub mod ccsystem;
pub mod homotopy;

pub use error::{FockError, Result};
