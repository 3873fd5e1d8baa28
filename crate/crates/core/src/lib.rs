//! Tight-binding toolkit for Rydberg composites.
//!
//! A Rydberg composite is a single Rydberg atom whose electron orbit encloses a
//! set of ground-state scatterers. Restricted to the degenerate hydrogenic
//! manifold, the electron sees an effective lattice Hamiltonian whose sites are
//! the scatterers. This crate evaluates that Hamiltonian from the closed-form
//! hydrogenic kernel, arranges scatterers on (broken) rings to realize dimer,
//! trimer and triangle chains, and analyses the resulting band topology.
//!
//! Module map:
//!
//! * [`hydrogenic`]: reduced radial functions `u_νl(r)` and their derivatives.
//! * [`composite`]: ring geometries, the coupling kernel, Hamiltonian assembly
//!   and the inverse ring-design problem.
//! * [`lattices`]: abstract chains and Bloch Hamiltonians.
//! * [`topology`]: band structures, Wilson-loop Zak phases, gaps and phase
//!   diagrams.
//! * [`spectra`]: finite-system sweeps, edge-state metrics and disorder.
//! * [`oracle`]: brute-force angular-momentum sum over the ν manifold.

pub mod composite;
mod error;
pub mod hydrogenic;
pub mod lattices;
mod linalg;
pub mod oracle;
mod par;
pub mod spectra;
pub mod topology;
pub mod units;

pub use error::{Error, Result};
