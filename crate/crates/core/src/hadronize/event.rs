use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::decode::{decode_shot, Decoded, RrPolicy};
use super::mesons::{apportion_energy, meson_kinematics, Meson};
use super::shots::sample_shots;
use super::strings::extract_strings;
use crate::error::{Error, Result};
use crate::hilbert::{BasisKind, Hamiltonian, HamiltonianSpec, StateVector};
use crate::lattice::{LadderGeometry, PhysicalParams};
use crate::propagate::{evolve_to, InitialState, KrylovConfig};

/// Measurement time used for a 13-rung ladder (μs).
pub const REFERENCE_MEASUREMENT_TIME: f64 = 0.35;
const REFERENCE_HALF_CHAIN: f64 = 6.0;

/// Default t_f: the 13-rung value scaled linearly with the half-chain length.
pub fn default_measurement_time(n_rungs: usize) -> f64 {
    REFERENCE_MEASUREMENT_TIME * ((n_rungs.max(1) - 1) as f64 / 2.0) / REFERENCE_HALF_CHAIN
}

/// Affine map from pair energy to Δ/Ω, decreasing in energy.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub energy_lo: f64,
    pub energy_hi: f64,
    pub detuning_lo: f64,
    pub detuning_hi: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self {
            energy_lo: 10.0,
            energy_hi: 100.0,
            detuning_lo: 2.0,
            detuning_hi: 3.0,
        }
    }
}

impl Calibration {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.energy_lo,
            self.energy_hi,
            self.detuning_lo,
            self.detuning_hi,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || !(self.energy_lo < self.energy_hi) || !(self.detuning_lo < self.detuning_hi) {
            return Err(Error::invalid(
                "calibration",
                "need energy_lo < energy_hi and detuning_lo < detuning_hi",
            ));
        }
        Ok(())
    }

    /// Δ/Ω for a pair energy, clamped to the calibrated range: the low end
    /// of the energy range maps to the high end of the detuning range.
    pub fn detuning_from_energy(&self, e_cm: f64) -> Result<f64> {
        self.validate()?;
        let f = (e_cm - self.energy_lo) / (self.energy_hi - self.energy_lo);
        let d = self.detuning_hi - (self.detuning_hi - self.detuning_lo) * f;
        Ok(d.clamp(self.detuning_lo, self.detuning_hi))
    }
}

/// Everything needed to turn a pair energy into hadrons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadronizationSetup {
    pub geometry: LadderGeometry,
    /// Ω and C6; the detuning is set per event.
    pub params: PhysicalParams,
    /// Measurement time t_f (μs).
    pub t_f: f64,
    pub krylov: KrylovConfig,
    pub basis: BasisKind,
    pub initial: InitialState,
    pub policy: RrPolicy,
    pub calibration: Calibration,
    pub max_atoms: usize,
}

impl HadronizationSetup {
    pub fn new(geometry: LadderGeometry, params: PhysicalParams) -> Self {
        let t_f = default_measurement_time(geometry.n_rungs);
        Self {
            geometry,
            params,
            t_f,
            krylov: KrylovConfig::default(),
            basis: BasisKind::Full,
            initial: InitialState::Product,
            policy: RrPolicy::Zero,
            calibration: Calibration::default(),
            max_atoms: crate::hilbert::DEFAULT_MAX_ATOMS,
        }
    }

    /// Central-excitation state evolved to t_f at the given Δ/Ω.
    pub fn measurement_state(&self, delta_over_omega: f64) -> Result<StateVector> {
        if !(self.t_f >= 0.0) {
            return Err(Error::invalid("t_f", "must be ≥ 0"));
        }
        let params = PhysicalParams {
            detuning: delta_over_omega * self.params.rabi,
            ..self.params
        };
        let basis = Arc::new(self.basis.build(&self.geometry, self.max_atoms)?);
        let psi0 = self
            .initial
            .prepare(&self.geometry, &params, basis.clone(), self.krylov)?;
        let spec = HamiltonianSpec {
            max_atoms: self.max_atoms,
            ..HamiltonianSpec::new(self.geometry.clone(), params)
        };
        let h = Hamiltonian::new(&spec, basis)?;
        Ok(evolve_to(&h, &psi0, self.t_f, self.krylov)?.0)
    }
}

/// Hadrons from one measured shot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotHadrons {
    pub shot_id: u64,
    /// False when the shot was discarded by the decoding policy.
    pub accepted: bool,
    pub multiplicity: usize,
    pub mesons: Vec<Meson>,
    pub rr_violations: usize,
    pub gauss_violations: usize,
}

/// Counts of shots per multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityHistogram {
    pub counts: Vec<u64>,
}

impl MultiplicityHistogram {
    pub fn add(&mut self, multiplicity: usize) {
        if self.counts.len() <= multiplicity {
            self.counts.resize(multiplicity + 1, 0);
        }
        self.counts[multiplicity] += 1;
    }

    pub fn merge(&mut self, other: &MultiplicityHistogram) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let weighted: u64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(m, c)| m as u64 * c)
            .sum();
        weighted as f64 / total as f64
    }

    /// `(multiplicity, count, frequency)` for every bin.
    pub fn rows(&self) -> Vec<(usize, u64, f64)> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .enumerate()
            .map(|(m, &c)| (m, c, c as f64 / total))
            .collect()
    }

    pub fn from_shots(shots: &[ShotHadrons]) -> Self {
        let mut h = Self::default();
        for s in shots.iter().filter(|s| s.accepted) {
            h.add(s.multiplicity);
        }
        h
    }
}

/// Decode → strings → apportioned energies → meson kinematics for one mask.
pub fn hadronize_mask(
    shot_id: u64,
    mask: u64,
    geom: &LadderGeometry,
    policy: RrPolicy,
    e_cm: f64,
) -> Result<ShotHadrons> {
    let cfg = match decode_shot(mask, geom, policy) {
        Decoded::Accepted(cfg) => cfg,
        Decoded::Rejected {
            rr_rungs,
            gauss_links,
        } => {
            return Ok(ShotHadrons {
                shot_id,
                accepted: false,
                multiplicity: 0,
                mesons: Vec::new(),
                rr_violations: rr_rungs,
                gauss_violations: gauss_links,
            })
        }
    };
    let strings = extract_strings(&cfg);
    let energies = apportion_energy(&strings, e_cm)?;
    let mesons = strings
        .iter()
        .zip(energies)
        .map(|(s, e)| meson_kinematics(s, e, geom))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShotHadrons {
        shot_id,
        accepted: true,
        multiplicity: mesons.len(),
        mesons,
        rr_violations: cfg.rr_violations,
        gauss_violations: cfg.gauss_violations,
    })
}

/// Samples shots from a measured state and converts each to hadrons.
pub fn hadronize_state(
    psi: &StateVector,
    geom: &LadderGeometry,
    policy: RrPolicy,
    e_cm: f64,
    n_shots: usize,
    seed: u64,
) -> Result<Vec<ShotHadrons>> {
    sample_shots(psi, n_shots, seed)?
        .par_iter()
        .map(|s| hadronize_mask(s.index, s.mask, geom, policy, e_cm))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventHadrons {
    pub e_cm: f64,
    pub delta_over_omega: f64,
    pub t_f: f64,
    pub shots: Vec<ShotHadrons>,
    pub histogram: MultiplicityHistogram,
}

/// Full chain for one pair energy: calibration → quench → shots → mesons.
pub fn hadronize_event(
    e_cm: f64,
    setup: &HadronizationSetup,
    n_shots: usize,
    seed: u64,
) -> Result<EventHadrons> {
    let ratio = setup.calibration.detuning_from_energy(e_cm)?;
    hadronize_at_detuning(ratio, e_cm, setup, n_shots, seed)
}

/// As [`hadronize_event`] but with Δ/Ω given directly.
pub fn hadronize_at_detuning(
    delta_over_omega: f64,
    e_cm: f64,
    setup: &HadronizationSetup,
    n_shots: usize,
    seed: u64,
) -> Result<EventHadrons> {
    let psi = setup.measurement_state(delta_over_omega)?;
    let shots = hadronize_state(&psi, &setup.geometry, setup.policy, e_cm, n_shots, seed)?;
    let histogram = MultiplicityHistogram::from_shots(&shots);
    Ok(EventHadrons {
        e_cm,
        delta_over_omega,
        t_f: setup.t_f,
        shots,
        histogram,
    })
}
