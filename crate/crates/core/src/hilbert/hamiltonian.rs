use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Basis, StateVector, DEFAULT_MAX_ATOMS};
use crate::error::{Error, Result};
use crate::lattice::{InteractionTable, LadderGeometry, PhysicalParams};
use crate::numeric::CHUNK;

/// Largest atom count for which explicit matrices are built.
pub const DENSE_MAX_ATOMS: usize = 12;

/// Everything that defines one static Rydberg Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub geometry: LadderGeometry,
    pub params: PhysicalParams,
    /// δ_j added to the global detuning for atom j (rad/μs).
    pub local_detunings: Vec<f64>,
    pub max_atoms: usize,
}

impl HamiltonianSpec {
    pub fn new(geometry: LadderGeometry, params: PhysicalParams) -> Self {
        let n = geometry.n_atoms();
        Self {
            geometry,
            params,
            local_detunings: vec![0.0; n],
            max_atoms: DEFAULT_MAX_ATOMS,
        }
    }

    pub fn with_local_detuning(mut self, atom: usize, delta: f64) -> Self {
        self.local_detunings[atom] = delta;
        self
    }

    pub fn n_atoms(&self) -> usize {
        self.geometry.n_atoms()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.local_detunings.len() != self.n_atoms() {
            return Err(Error::DimensionMismatch {
                expected: self.n_atoms(),
                got: self.local_detunings.len(),
            });
        }
        if self.local_detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("local_detunings", "must be finite"));
        }
        Ok(())
    }

    pub fn full_basis(&self) -> Result<Arc<Basis>> {
        Ok(Arc::new(Basis::full(self.n_atoms(), self.max_atoms)?))
    }
}

/// Compiled Hamiltonian on a fixed basis: cached diagonal plus the Rabi term,
/// applied matrix-free.
///
/// The diagonal is split into the interaction energy Σ V_jk n_j n_k (fixed by
/// the geometry) and the detuning part, so time-dependent drives only need
/// [`Hamiltonian::set_drive`].
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    basis: Arc<Basis>,
    interaction: Vec<f64>,
    diag: Vec<f64>,
    half_rabi: f64,
    /// Neighbour indices for restricted bases (CSR layout).
    hops: Option<Hops>,
}

#[derive(Clone, Debug)]
struct Hops {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Hamiltonian {
    pub fn new(spec: &HamiltonianSpec, basis: Arc<Basis>) -> Result<Self> {
        spec.validate()?;
        if basis.n_atoms() != spec.n_atoms() {
            return Err(Error::DimensionMismatch {
                expected: spec.n_atoms(),
                got: basis.n_atoms(),
            });
        }
        if basis.n_atoms() > spec.max_atoms {
            return Err(Error::Capacity {
                atoms: basis.n_atoms(),
                limit: spec.max_atoms,
                what: "state vectors",
            });
        }
        let table = InteractionTable::new(&spec.geometry, &spec.params)?;
        let interaction = interaction_energies(&basis, &table);
        let hops = (!basis.is_full()).then(|| build_hops(&basis));
        let mut h = Self {
            basis,
            diag: Vec::new(),
            interaction,
            half_rabi: 0.0,
            hops,
        };
        let detunings: Vec<f64> = spec
            .local_detunings
            .iter()
            .map(|d| spec.params.detuning + d)
            .collect();
        h.set_drive(spec.params.rabi, &detunings);
        Ok(h)
    }

    pub fn full(spec: &HamiltonianSpec) -> Result<Self> {
        Self::new(spec, spec.full_basis()?)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn rabi(&self) -> f64 {
        2.0 * self.half_rabi
    }

    /// Resets Ω and the per-atom effective detunings Δ + δ_j.
    pub fn set_drive(&mut self, rabi: f64, detunings: &[f64]) {
        debug_assert_eq!(detunings.len(), self.basis.n_atoms());
        self.half_rabi = 0.5 * rabi;
        let basis = &*self.basis;
        self.diag = self
            .interaction
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let mut e = *v;
                let mut rest = basis.mask(i);
                while rest != 0 {
                    e -= detunings[rest.trailing_zeros() as usize];
                    rest &= rest - 1;
                }
                e
            })
            .collect();
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// out ← H·input
    pub fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        assert_eq!(input.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let n = self.basis.n_atoms();
        let h = self.half_rabi;
        let diag = &self.diag;
        match &self.hops {
            None => out
                .par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let base = c * CHUNK;
                    for (k, o) in chunk.iter_mut().enumerate() {
                        let s = base + k;
                        let mut off = C64::new(0.0, 0.0);
                        for j in 0..n {
                            off += input[s ^ (1 << j)];
                        }
                        *o = input[s] * diag[s] + off * h;
                    }
                }),
            Some(hops) => out
                .par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| {
                    let base = c * CHUNK;
                    for (k, o) in chunk.iter_mut().enumerate() {
                        let s = base + k;
                        let mut off = C64::new(0.0, 0.0);
                        for &t in &hops.targets[hops.offsets[s]..hops.offsets[s + 1]] {
                            off += input[t as usize];
                        }
                        *o = input[s] * diag[s] + off * h;
                    }
                }),
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let mut out = StateVector::zeros(self.basis.clone());
        self.apply_into(psi.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    /// ⟨ψ|H|ψ⟩ (real for Hermitian H).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let hpsi = self.apply(psi)?;
        Ok(psi.inner(&hpsi)?.re)
    }

    /// Explicit real-symmetric matrix in this basis.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        if self.basis.n_atoms() > DENSE_MAX_ATOMS {
            return Err(Error::Capacity {
                atoms: self.basis.n_atoms(),
                limit: DENSE_MAX_ATOMS,
                what: "dense matrices",
            });
        }
        let dim = self.dim();
        let n = self.basis.n_atoms();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            m[(s, s)] = self.diag[s];
            let mask = self.basis.mask(s);
            for j in 0..n {
                if let Some(t) = self.basis.index_of(mask ^ (1 << j)) {
                    m[(t, s)] = self.half_rabi;
                }
            }
        }
        Ok(m)
    }
}

fn interaction_energies(basis: &Basis, table: &InteractionTable) -> Vec<f64> {
    let n = table.n_atoms();
    let mut rows = vec![vec![0.0; n]; n];
    for (j, k, v) in table.pairs() {
        rows[j][k] = v;
        rows[k][j] = v;
    }
    (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            let mask = basis.mask(i);
            let mut e = 0.0;
            let mut rest = mask;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let mut later = rest;
                while later != 0 {
                    e += rows[j][later.trailing_zeros() as usize];
                    later &= later - 1;
                }
            }
            e
        })
        .collect()
}

fn build_hops(basis: &Basis) -> Hops {
    let n = basis.n_atoms();
    let per_state: Vec<Vec<u32>> = (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            let mask = basis.mask(i);
            (0..n)
                .filter_map(|j| basis.index_of(mask ^ (1 << j)).map(|t| t as u32))
                .collect()
        })
        .collect();
    let mut offsets = Vec::with_capacity(per_state.len() + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    for row in per_state {
        targets.extend_from_slice(&row);
        offsets.push(targets.len());
    }
    Hops { offsets, targets }
}

/// Diagonal of H in the full basis: −Σ_j (Δ+δ_j) n_j + Σ_{j<k} V_jk n_j n_k.
pub fn diagonal_energies(spec: &HamiltonianSpec) -> Result<Vec<f64>> {
    Ok(Hamiltonian::full(spec)?.diag)
}

/// H·ψ in ψ's basis (unnormalized).
pub fn apply_hamiltonian(spec: &HamiltonianSpec, psi: &StateVector) -> Result<StateVector> {
    if psi.n_atoms() != spec.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: 1 << spec.n_atoms(),
            got: psi.dim(),
        });
    }
    Hamiltonian::new(spec, psi.basis().clone())?.apply(psi)
}

/// Explicit 2^N × 2^N matrix (N ≤ [`DENSE_MAX_ATOMS`]).
pub fn dense_matrix(spec: &HamiltonianSpec) -> Result<DMatrix<f64>> {
    if spec.n_atoms() > DENSE_MAX_ATOMS {
        return Err(Error::Capacity {
            atoms: spec.n_atoms(),
            limit: DENSE_MAX_ATOMS,
            what: "dense matrices",
        });
    }
    Hamiltonian::full(spec)?.to_dense()
}
