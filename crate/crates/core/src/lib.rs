//! Harmonically driven light-matter models (Jaynes-Cummings, Lipkin-Meshkov-Glick)
//! solved both by direct time integration and in the extended Floquet space,
//! where the drive becomes an extra lattice dimension.
//!
//! The modules build on each other: [`hilbert`] provides bases and operators,
//! [`propagate`] integrates the Schrödinger equation, [`floquet`] assembles
//! and diagonalizes extended-space Hamiltonians, [`jc`] and [`lmg`] hold the
//! model physics, [`spectra`] does level statistics and [`fsl`] turns any
//! Hamiltonian into a Fock-state-lattice graph.

pub mod cli;
mod error;
pub mod floquet;
pub mod fsl;
pub mod hilbert;
pub mod jc;
pub mod linalg;
pub mod lmg;
pub mod propagate;
pub mod special;
pub mod spectra;
pub mod svg;

pub use error::{Error, Result};
