use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::krylov::{KrylovConfig, KrylovPropagator};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, Hamiltonian, HamiltonianSpec, StateVector};
use crate::lattice::{LadderGeometry, PhysicalParams};

/// Piecewise-linear controls Ω(t), Δ(t) and a local detuning δ(t) on the
/// target atom, sampled at shared breakpoints starting at t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub times: Vec<f64>,
    pub rabi: Vec<f64>,
    pub detuning: Vec<f64>,
    pub local_detuning: Vec<f64>,
}

impl RampSchedule {
    /// Ground state → single excitation on the target atom.
    ///
    /// All atoms sit far red-detuned while Ω ramps up; the target's local
    /// detuning then sweeps it through resonance and Ω ramps back down.
    pub fn single_excitation(rabi: f64) -> Self {
        let far = 40.0;
        Self {
            times: vec![0.0, 0.25, 2.25, 2.5],
            rabi: vec![0.0, rabi, rabi, 0.0],
            detuning: vec![-far; 4],
            local_detuning: vec![0.0, 0.0, 2.0 * far, 2.0 * far],
        }
    }

    /// A schedule that does nothing.
    pub fn empty() -> Self {
        Self {
            times: vec![0.0],
            rabi: vec![0.0],
            detuning: vec![0.0],
            local_detuning: vec![0.0],
        }
    }

    pub fn duration(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.times.len();
        if n == 0 {
            return Err(Error::Schedule("no breakpoints".into()));
        }
        if self.rabi.len() != n || self.detuning.len() != n || self.local_detuning.len() != n {
            return Err(Error::Schedule("control curves differ in length".into()));
        }
        if self.times[0] != 0.0 {
            return Err(Error::Schedule("first breakpoint must be t = 0".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Schedule(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        let all = [
            &self.times,
            &self.rabi,
            &self.detuning,
            &self.local_detuning,
        ];
        if all.iter().any(|c| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Schedule("non-finite control value".into()));
        }
        Ok(())
    }

    /// (Ω, Δ, δ) at time t, clamped to the schedule ends.
    pub fn controls_at(&self, t: f64) -> (f64, f64, f64) {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return (self.rabi[0], self.detuning[0], self.local_detuning[0]);
        }
        if k == self.times.len() {
            let l = k - 1;
            return (self.rabi[l], self.detuning[l], self.local_detuning[l]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let f = (t - t0) / (t1 - t0);
        let lerp = |c: &[f64]| c[k - 1] + f * (c[k] - c[k - 1]);
        (
            lerp(&self.rabi),
            lerp(&self.detuning),
            lerp(&self.local_detuning),
        )
    }

    /// Midpoint-sampled piecewise-constant steps `(dt, Ω, Δ, δ)` of size ≤ `step`.
    pub fn steps(&self, step: f64) -> Vec<(f64, f64, f64, f64)> {
        let total = self.duration();
        if total == 0.0 {
            return Vec::new();
        }
        let n = (total / step).ceil().max(1.0) as usize;
        let dt = total / n as f64;
        (0..n)
            .map(|k| {
                let (r, d, l) = self.controls_at((k as f64 + 0.5) * dt);
                (dt, r, d, l)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: StateVector,
    /// |⟨target|ψ⟩|² for the intended single-excitation basis state.
    pub target_overlap: f64,
}

/// Default time step for piecewise-constant ramp integration (μs).
pub const DEFAULT_RAMP_STEP: f64 = 0.01;

/// Evolves |g…g⟩ under the time-dependent ramp with an extra local detuning on
/// `target_atom`.
///
/// Only C6 is taken from `params`; Ω and Δ follow the schedule.
pub fn adiabatic_prepare(
    geom: &LadderGeometry,
    params: &PhysicalParams,
    basis: Arc<Basis>,
    target_atom: usize,
    schedule: &RampSchedule,
    step: f64,
    krylov: KrylovConfig,
) -> Result<PreparedState> {
    schedule.validate()?;
    if !(step > 0.0) {
        return Err(Error::Schedule("step must be > 0".into()));
    }
    let n = geom.n_atoms();
    if target_atom >= n {
        return Err(Error::invalid(
            "target_atom",
            format!("{target_atom} is not below the atom count {n}"),
        ));
    }
    let spec = HamiltonianSpec::new(geom.clone(), *params);
    let mut h = Hamiltonian::new(&spec, basis.clone())?;
    let mut psi = StateVector::basis_state(basis.clone(), 0)?;
    let mut detunings = vec![0.0; n];
    for (dt, rabi, global, local) in schedule.steps(step) {
        detunings.iter_mut().for_each(|d| *d = global);
        detunings[target_atom] += local;
        h.set_drive(rabi, &detunings);
        KrylovPropagator::new(&h, krylov)?.evolve(psi.amplitudes_mut(), dt)?;
    }
    psi.normalize();
    let target = StateVector::basis_state(basis, 1 << target_atom)?;
    let target_overlap = target.fidelity(&psi)?;
    Ok(PreparedState {
        state: psi,
        target_overlap,
    })
}
