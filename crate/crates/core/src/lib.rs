//! Confinement dynamics on a two-leg Rydberg ladder and a hadronization
//! pipeline built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! - [`lattice`]: physical constants, ladder geometry and pair interactions.
//! - [`hilbert`]: basis indexing, state vectors and the matrix-free Hamiltonian.
//! - [`propagate`]: Krylov and dense real-time evolution, adiabatic preparation.
//! - [`observe`]: staggered field/charge observables, half-chain entropy, sweeps.
//! - [`hadronize`]: shot sampling, string extraction and meson kinematics.
//! - [`bridge`]: parton-event ingestion, rest-frame boosts and the batch pipeline.
//! - [`cli`]: configuration and the command implementations behind the binary.
//!
//! Units: lengths in μm, times in μs, energies as angular frequencies in
//! rad/μs (ħ = 1). Hadron-level quantities are in GeV.

pub mod bridge;
pub mod cli;
pub mod error;
pub mod hadronize;
pub mod hilbert;
pub mod lattice;
pub mod numeric;
pub mod observe;
pub mod propagate;

pub use error::{Error, Result};
