use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use super::Basis;
use crate::error::{Error, Result};
use crate::numeric::{self, CHUNK};

/// Allowed deviation of ‖ψ‖ from 1 before an observable refuses the state.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Complex amplitudes over a [`Basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: Arc<Basis>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: Arc<Basis>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: amps.len(),
            });
        }
        Ok(Self { basis, amps })
    }

    pub fn zeros(basis: Arc<Basis>) -> Self {
        let amps = vec![C64::new(0.0, 0.0); basis.dim()];
        Self { basis, amps }
    }

    /// |mask⟩; fails if the mask is outside the basis.
    pub fn basis_state(basis: Arc<Basis>, mask: u64) -> Result<Self> {
        let idx = basis
            .index_of(mask)
            .ok_or_else(|| Error::invalid("mask", format!("{mask:#b} is not in the basis")))?;
        let mut s = Self::zeros(basis);
        s.amps[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Normalized state with i.i.d. uniform real and imaginary parts.
    pub fn random<R: Rng + ?Sized>(basis: Arc<Basis>, rng: &mut R) -> Self {
        let amps = (0..basis.dim())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = Self { basis, amps };
        s.normalize();
        s
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn n_atoms(&self) -> usize {
        self.basis.n_atoms()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        numeric::norm_sqr(&self.amps)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            numeric::scale(C64::new(1.0 / n, 0.0), &mut self.amps);
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n2 = self.norm_sqr();
        if (n2.sqrt() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization { norm_sqr: n2 });
        }
        Ok(())
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_basis(other)?;
        Ok(numeric::dotc(&self.amps, &other.amps))
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn conj(&self) -> Self {
        Self {
            basis: self.basis.clone(),
            amps: self.amps.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.par_iter().map(|z| z.norm_sqr()).collect()
    }

    pub(crate) fn check_same_basis(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim()
            || (!Arc::ptr_eq(&self.basis, &other.basis) && self.basis != other.basis)
        {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Re-expresses the state in the full 2^N basis.
    pub fn to_full(&self) -> Result<StateVector> {
        let n = self.n_atoms();
        let full = Arc::new(Basis::full(n, 63)?);
        let mut out = StateVector::zeros(full);
        for (i, a) in self.amps.iter().enumerate() {
            out.amps[self.basis.mask(i) as usize] = *a;
        }
        Ok(out)
    }

    /// Per-chunk reduction of `f(mask, |ψ|²)` into a vector of length `width`,
    /// folded in chunk order so the result does not depend on scheduling.
    pub(crate) fn reduce_weights<F>(&self, width: usize, f: F) -> Vec<f64>
    where
        F: Fn(u64, f64, &mut [f64]) + Sync,
    {
        let basis = &*self.basis;
        let partials: Vec<Vec<f64>> = self
            .amps
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, chunk)| {
                let mut acc = vec![0.0; width];
                for (k, z) in chunk.iter().enumerate() {
                    let p = z.norm_sqr();
                    if p != 0.0 {
                        f(basis.mask(c * CHUNK + k), p, &mut acc);
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; width];
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
        total
    }
}

/// ⟨n_j⟩ for every atom.
pub fn occupancy_expectations(psi: &StateVector) -> Result<Vec<f64>> {
    psi.check_normalized()?;
    let n = psi.n_atoms();
    Ok(psi.reduce_weights(n, |mask, p, acc| {
        let mut rest = mask;
        while rest != 0 {
            acc[rest.trailing_zeros() as usize] += p;
            rest &= rest - 1;
        }
    }))
}
