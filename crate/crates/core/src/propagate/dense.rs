use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::hilbert::{Hamiltonian, HamiltonianSpec, StateVector};

/// Exact propagator from a full eigendecomposition H = QΛQᵀ.
///
/// Only for oracle-sized systems (see [`crate::hilbert::DENSE_MAX_ATOMS`]).
pub struct DenseEvolver {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl DenseEvolver {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        Ok(Self {
            eig: h.to_dense()?.symmetric_eigen(),
        })
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        Self {
            eig: m.symmetric_eigen(),
        }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eig.eigenvalues
    }

    /// Q·e^{−iΛt}·Qᵀ·ψ
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let q = &self.eig.eigenvectors;
        let dim = psi.len();
        let coeffs: Vec<C64> = (0..dim)
            .map(|l| {
                let c: C64 = (0..dim).map(|s| psi[s] * q[(s, l)]).sum();
                c * C64::from_polar(1.0, -self.eig.eigenvalues[l] * t)
            })
            .collect();
        (0..dim)
            .map(|s| (0..dim).map(|l| coeffs[l] * q[(s, l)]).sum())
            .collect()
    }
}

/// e^{−iHt}ψ₀ by explicit diagonalisation.
pub fn dense_evolve(spec: &HamiltonianSpec, psi0: &StateVector, t: f64) -> Result<StateVector> {
    let h = Hamiltonian::new(spec, psi0.basis().clone())?;
    let ev = DenseEvolver::new(&h)?;
    StateVector::from_amplitudes(psi0.basis().clone(), ev.evolve(psi0.amplitudes(), t))
}
