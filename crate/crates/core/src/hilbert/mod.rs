//! Basis indexing, state vectors and the matrix-free Rydberg Hamiltonian
//!
//! H = (Ω/2) Σ_j σˣ_j − Σ_j (Δ + δ_j) n_j + Σ_{j<k} V_jk n_j n_k.

mod basis;
mod hamiltonian;
mod state;

pub use basis::{Basis, BasisKind, BlockadeBasis, DEFAULT_MAX_ATOMS};
pub use hamiltonian::{
    apply_hamiltonian, dense_matrix, diagonal_energies, Hamiltonian, HamiltonianSpec,
    DENSE_MAX_ATOMS,
};
pub use state::{occupancy_expectations, StateVector, NORM_TOLERANCE};

#[cfg(test)]
mod tests;
