use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hadronize::{default_measurement_time, Calibration, HadronizationSetup, RrPolicy};
use crate::hilbert::{BasisKind, DEFAULT_MAX_ATOMS};
use crate::lattice::{
    LadderGeometry, PhysicalParams, DEFAULT_C6, DEFAULT_INV_ASPECT_RATIO, DEFAULT_RABI,
};
use crate::observe::SweepSettings;
use crate::propagate::{InitialState, KrylovConfig, Reorthogonalize};

/// Complete run description: a TOML file, then command-line overrides.
///
/// A section missing from the file keeps its defaults; a section that is
/// present only has what it spells out. Among `spacing`/`rb_over_a` and
/// `detuning`/`delta_over_omega` exactly one of each pair must end up set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub evolution: EvolutionConfig,
    pub sweep: SweepConfig,
    pub hadronization: HadronizationConfig,
    pub output: OutputConfig,
}

fn default_n_rungs() -> usize {
    7
}
fn default_rho() -> f64 {
    DEFAULT_INV_ASPECT_RATIO
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "default_n_rungs")]
    pub n_rungs: usize,
    /// Rung spacing a (μm).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rb_over_a: Option<f64>,
    /// ρ = h/a.
    #[serde(default = "default_rho")]
    pub rho: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            n_rungs: default_n_rungs(),
            spacing: None,
            rb_over_a: Some(2.173),
            rho: default_rho(),
        }
    }
}

fn default_rabi() -> f64 {
    DEFAULT_RABI
}
fn default_c6() -> f64 {
    DEFAULT_C6
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Ω (rad/μs).
    #[serde(default = "default_rabi")]
    pub rabi: f64,
    /// Δ (rad/μs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_over_omega: Option<f64>,
    /// C6 (rad·μm⁶/μs).
    #[serde(default = "default_c6")]
    pub c6: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            rabi: default_rabi(),
            detuning: None,
            delta_over_omega: Some(2.0),
            c6: default_c6(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    /// Length of the evolve / entropy window (μs).
    pub window: f64,
    /// Sample times in the window, endpoints included.
    pub n_samples: usize,
    /// Measurement time for hadronization (μs); defaults to the size-scaled value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    pub tolerance: f64,
    pub min_step: f64,
    pub krylov_dim: usize,
    pub reorthogonalize: Reorthogonalize,
    pub basis: BasisKind,
    pub initial: InitialState,
    pub max_atoms: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        let k = KrylovConfig::default();
        Self {
            window: 1.8,
            n_samples: 61,
            t_f: None,
            tolerance: k.tolerance,
            min_step: k.min_step,
            krylov_dim: k.max_dim,
            reorthogonalize: k.reorthogonalize,
            basis: BasisKind::Full,
            initial: InitialState::Product,
            max_atoms: DEFAULT_MAX_ATOMS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub delta_over_omega: Vec<f64>,
    pub rb_over_a: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            delta_over_omega: vec![1.5, 2.0, 2.5, 3.0],
            rb_over_a: vec![2.173],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HadronizationConfig {
    pub n_shots: usize,
    pub seed: u64,
    pub rr_policy: RrPolicy,
    pub calibration: Calibration,
    /// Δ/Ω values for a direct scan when no events file is given.
    pub delta_grid: Vec<f64>,
    /// Pair energy (GeV) used by the direct scan.
    pub e_cm: f64,
}

impl Default for HadronizationConfig {
    fn default() -> Self {
        Self {
            n_shots: 1000,
            seed: 0,
            rr_policy: RrPolicy::Zero,
            calibration: Calibration::default(),
            delta_grid: Vec::new(),
            e_cm: 50.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn config_err(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {reason}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Field-level consistency checks; run before any computation.
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.n_rungs == 0 {
            return Err(config_err("geometry.n_rungs", "must be at least 1"));
        }
        match (g.spacing, g.rb_over_a) {
            (Some(_), Some(_)) => {
                return Err(config_err(
                    "geometry",
                    "give either `spacing` or `rb_over_a`, not both",
                ))
            }
            (None, None) => {
                return Err(config_err(
                    "geometry",
                    "one of `spacing` or `rb_over_a` is required",
                ))
            }
            (Some(a), None) => positive("geometry.spacing", a)?,
            (None, Some(r)) => positive("geometry.rb_over_a", r)?,
        }
        positive("geometry.rho", g.rho)?;

        let p = &self.physics;
        positive("physics.rabi", p.rabi)?;
        positive("physics.c6", p.c6)?;
        match (p.detuning, p.delta_over_omega) {
            (Some(_), Some(_)) => {
                return Err(config_err(
                    "physics",
                    "give either `detuning` or `delta_over_omega`, not both",
                ))
            }
            (None, None) => {
                return Err(config_err(
                    "physics",
                    "one of `detuning` or `delta_over_omega` is required",
                ))
            }
            (Some(v), None) | (None, Some(v)) if !v.is_finite() => {
                return Err(config_err("physics", "detuning must be finite"))
            }
            _ => {}
        }

        let e = &self.evolution;
        if !(e.window >= 0.0 && e.window.is_finite()) {
            return Err(config_err("evolution.window", "must be ≥ 0"));
        }
        if e.n_samples == 0 {
            return Err(config_err("evolution.n_samples", "must be at least 1"));
        }
        if let Some(t) = e.t_f {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_err("evolution.t_f", "must be ≥ 0"));
            }
        }
        positive("evolution.tolerance", e.tolerance)?;
        positive("evolution.min_step", e.min_step)?;
        if e.krylov_dim < 2 {
            return Err(config_err("evolution.krylov_dim", "must be at least 2"));
        }
        if let BasisKind::Blockade { radius } = e.basis {
            positive("evolution.basis.radius", radius)?;
        }

        let h = &self.hadronization;
        if h.n_shots == 0 {
            return Err(config_err("hadronization.n_shots", "must be at least 1"));
        }
        h.calibration
            .validate()
            .map_err(|err| config_err("hadronization.calibration", err))?;
        positive("hadronization.e_cm", h.e_cm)?;
        Ok(())
    }

    pub fn params(&self) -> PhysicalParams {
        let p = &self.physics;
        let detuning = p
            .detuning
            .unwrap_or_else(|| p.delta_over_omega.unwrap_or(0.0) * p.rabi);
        PhysicalParams {
            rabi: p.rabi,
            detuning,
            c6: p.c6,
        }
    }

    pub fn geometry(&self) -> Result<LadderGeometry> {
        let g = &self.geometry;
        match (g.spacing, g.rb_over_a) {
            (Some(a), _) => LadderGeometry::new(g.n_rungs, a, g.rho),
            (None, Some(r)) => {
                LadderGeometry::from_blockade_ratio(g.n_rungs, r, g.rho, &self.params())
            }
            (None, None) => Err(config_err(
                "geometry",
                "one of `spacing` or `rb_over_a` is required",
            )),
        }
    }

    pub fn krylov(&self) -> KrylovConfig {
        let e = &self.evolution;
        KrylovConfig {
            max_dim: e.krylov_dim,
            tolerance: e.tolerance,
            min_step: e.min_step,
            reorthogonalize: e.reorthogonalize,
        }
    }

    pub fn sweep_settings(&self) -> SweepSettings {
        let e = &self.evolution;
        SweepSettings {
            window: e.window,
            n_samples: e.n_samples,
            krylov: self.krylov(),
            basis: e.basis,
            initial: e.initial.clone(),
        }
    }

    pub fn hadronization_setup(&self) -> Result<HadronizationSetup> {
        let geometry = self.geometry()?;
        let e = &self.evolution;
        let h = &self.hadronization;
        Ok(HadronizationSetup {
            t_f: e
                .t_f
                .unwrap_or_else(|| default_measurement_time(geometry.n_rungs)),
            geometry,
            params: self.params(),
            krylov: self.krylov(),
            basis: e.basis,
            initial: e.initial.clone(),
            policy: h.rr_policy,
            calibration: h.calibration,
            max_atoms: e.max_atoms,
        })
    }
}
