use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Hamiltonian, StateVector};
use crate::lattice::LadderGeometry;
use crate::propagate::{evolve_observed, uniform_times, KrylovConfig};

/// Schmidt weights below this singular value are dropped.
const SINGULAR_CUTOFF: f64 = 1e-14;

/// Number of atoms in the kept (left) block, rungs 1..(n−1)/2.
pub fn kept_atoms(geom: &LadderGeometry) -> Result<usize> {
    if geom.n_rungs % 2 == 0 {
        return Err(Error::BipartitionUndefined(geom.n_rungs));
    }
    Ok(2 * ((geom.n_rungs - 1) / 2))
}

/// ln(2^{N_half}): the largest possible half-chain entropy.
pub fn max_half_chain_entropy(geom: &LadderGeometry) -> Result<f64> {
    Ok(kept_atoms(geom)? as f64 * std::f64::consts::LN_2)
}

/// Squared Schmidt coefficients across (atoms < `kept`) | (rest).
pub fn schmidt_weights(psi: &StateVector, kept: usize) -> Vec<f64> {
    let n = psi.n_atoms();
    let rows = 1usize << kept;
    let cols = 1usize << (n - kept);
    let mut m = DMatrix::<C64>::zeros(rows, cols);
    let low = (rows - 1) as u64;
    let basis = psi.basis();
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let mask = basis.mask(i);
        m[((mask & low) as usize, (mask >> kept) as usize)] = *a;
    }
    let sv = if rows <= cols {
        m.singular_values()
    } else {
        m.adjoint().singular_values()
    };
    sv.iter()
        .filter(|&&s| s > SINGULAR_CUTOFF)
        .map(|s| s * s)
        .collect()
}

/// −Σ p ln p over Schmidt weights.
pub fn entropy_of_weights(weights: &[f64]) -> f64 {
    -weights
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Von Neumann entropy of the left half of the ladder (central rung traced out).
pub fn half_chain_entropy(psi: &StateVector, geom: &LadderGeometry) -> Result<f64> {
    let kept = kept_atoms(geom)?;
    psi.check_normalized()?;
    if psi.n_atoms() != geom.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: geom.n_atoms(),
            got: psi.n_atoms(),
        });
    }
    Ok(entropy_of_weights(&schmidt_weights(psi, kept)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    /// S_e in nats.
    pub entropy: Vec<f64>,
}

impl EntropyTrace {
    pub fn max(&self) -> f64 {
        self.entropy.iter().copied().fold(0.0, f64::max)
    }
}

/// Half-chain entropy at `n_samples` uniform times in [0, t_max].
pub fn entropy_trace(
    h: &Hamiltonian,
    geom: &LadderGeometry,
    psi0: &StateVector,
    t_max: f64,
    n_samples: usize,
    cfg: KrylovConfig,
) -> Result<EntropyTrace> {
    kept_atoms(geom)?;
    let times = uniform_times(t_max, n_samples);
    let (traj, _) = evolve_observed(h, psi0, &times, cfg, |_, s| half_chain_entropy(s, geom))?;
    Ok(EntropyTrace {
        times: traj.times,
        entropy: traj.snapshots,
    })
}
