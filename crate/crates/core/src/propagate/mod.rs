//! Real-time evolution e^{−iHt}, initial-state preparation and trajectories.

mod dense;
mod krylov;
mod ramp;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dense::{dense_evolve, DenseEvolver};
pub use krylov::{EvolutionStats, KrylovConfig, KrylovPropagator, Reorthogonalize};
pub use ramp::{adiabatic_prepare, PreparedState, RampSchedule, DEFAULT_RAMP_STEP};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Hamiltonian, HamiltonianSpec, StateVector};
use crate::lattice::{central_rung, field_atom, LadderGeometry};

/// Atom count above which full-state trajectories are refused.
pub const FULL_RECORD_MAX_ATOMS: usize = 20;

/// Snapshots at increasing times.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<f64>,
    pub snapshots: Vec<T>,
    pub stats: EvolutionStats,
}

/// Basis mask encoding one field value per rung under the staggered mapping.
pub fn product_state_mask(geom: &LadderGeometry, fields: &[i8]) -> Result<u64> {
    if fields.len() != geom.n_rungs {
        return Err(Error::DimensionMismatch {
            expected: geom.n_rungs,
            got: fields.len(),
        });
    }
    let mut mask = 0u64;
    for (rung, &e) in fields.iter().enumerate() {
        if !(-1..=1).contains(&e) {
            return Err(Error::invalid(
                "field",
                format!("{e} is not in {{-1, 0, +1}}"),
            ));
        }
        if let Some(atom) = field_atom(rung, e) {
            mask |= 1 << atom;
        }
    }
    Ok(mask)
}

pub fn prepare_product_state(
    basis: Arc<Basis>,
    geom: &LadderGeometry,
    fields: &[i8],
) -> Result<StateVector> {
    StateVector::basis_state(basis, product_state_mask(geom, fields)?)
}

/// E = −1 on the central rung, zero elsewhere.
pub fn central_excitation_fields(n_rungs: usize) -> Vec<i8> {
    let mut f = vec![0; n_rungs];
    f[central_rung(n_rungs)] = -1;
    f
}

/// How the central-excitation state is produced before a quench.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// The ideal basis state.
    #[default]
    Product,
    /// Adiabatic preparation from |g…g⟩ with a local detuning on the target.
    Adiabatic { schedule: RampSchedule, step: f64 },
}

impl InitialState {
    /// Prepares E = −1 on the central rung (and 0 elsewhere).
    pub fn prepare(
        &self,
        geom: &LadderGeometry,
        params: &crate::lattice::PhysicalParams,
        basis: Arc<Basis>,
        cfg: KrylovConfig,
    ) -> Result<StateVector> {
        let fields = central_excitation_fields(geom.n_rungs);
        match self {
            InitialState::Product => prepare_product_state(basis, geom, &fields),
            InitialState::Adiabatic { schedule, step } => {
                let target = product_state_mask(geom, &fields)?.trailing_zeros() as usize;
                let prepared =
                    adiabatic_prepare(geom, params, basis, target, schedule, *step, cfg)?;
                log::debug!(
                    "adiabatic preparation overlap {:.6}",
                    prepared.target_overlap
                );
                Ok(prepared.state)
            }
        }
    }
}

fn check_times(t: f64, record_times: &[f64]) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be ≥ 0, got {t}")));
    }
    if record_times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::invalid("record_times", "must be non-decreasing"));
    }
    if record_times.iter().any(|&r| !(0.0..=t).contains(&r)) {
        return Err(Error::invalid("record_times", "must lie in [0, t]"));
    }
    Ok(())
}

/// Evolves ψ₀ through `record_times` (non-decreasing, starting at or after 0),
/// handing each snapshot to `observe`. Returns the observations and the
/// final state at the last record time.
pub fn evolve_observed<R, F>(
    h: &Hamiltonian,
    psi0: &StateVector,
    record_times: &[f64],
    cfg: KrylovConfig,
    mut observe: F,
) -> Result<(Trajectory<R>, StateVector)>
where
    F: FnMut(f64, &StateVector) -> Result<R>,
{
    let t_end = record_times.last().copied().unwrap_or(0.0);
    check_times(t_end, record_times)?;
    let mut prop = KrylovPropagator::new(h, cfg)?;
    let mut psi = psi0.clone();
    let mut now = 0.0;
    let mut snapshots = Vec::with_capacity(record_times.len());
    for &t in record_times {
        if t > now {
            prop.evolve(psi.amplitudes_mut(), t - now)?;
            now = t;
        }
        snapshots.push(observe(t, &psi)?);
    }
    Ok((
        Trajectory {
            times: record_times.to_vec(),
            snapshots,
            stats: prop.stats,
        },
        psi,
    ))
}

/// Full-state trajectory of e^{−iHτ}ψ₀ at each record time τ ∈ [0, t].
pub fn krylov_evolve(
    spec: &HamiltonianSpec,
    psi0: &StateVector,
    t: f64,
    record_times: &[f64],
    cfg: KrylovConfig,
) -> Result<Trajectory<StateVector>> {
    check_times(t, record_times)?;
    if psi0.n_atoms() > FULL_RECORD_MAX_ATOMS && !record_times.is_empty() {
        return Err(Error::Capacity {
            atoms: psi0.n_atoms(),
            limit: FULL_RECORD_MAX_ATOMS,
            what: "full-state trajectories",
        });
    }
    let h = Hamiltonian::new(spec, psi0.basis().clone())?;
    let (traj, _) = evolve_observed(&h, psi0, record_times, cfg, |_, s| Ok(s.clone()))?;
    Ok(traj)
}

/// e^{−iHt}ψ₀ without intermediate snapshots.
pub fn evolve_to(
    h: &Hamiltonian,
    psi0: &StateVector,
    t: f64,
    cfg: KrylovConfig,
) -> Result<(StateVector, EvolutionStats)> {
    check_times(t, &[])?;
    let mut prop = KrylovPropagator::new(h, cfg)?;
    let mut psi = psi0.clone();
    prop.evolve(psi.amplitudes_mut(), t)?;
    Ok((psi, prop.stats))
}

/// `n` uniformly spaced times covering [0, t_max]; a single 0 when t_max = 0.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    if t_max == 0.0 || n <= 1 {
        return vec![0.0];
    }
    let mut v: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
    v[n - 1] = t_max;
    v
}
