use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::entropy::{entropy_trace, EntropyTrace};
use crate::error::{Error, Result};
use crate::hilbert::{BasisKind, Hamiltonian, HamiltonianSpec};
use crate::lattice::LadderGeometry;
use crate::propagate::{InitialState, KrylovConfig};

/// Maximum half-chain entropy over (Δ/Ω, R_b/a).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub delta_over_omega: Vec<f64>,
    pub rb_over_a: Vec<f64>,
    /// Evolution window (μs).
    pub window: f64,
    /// `values[i][j]` belongs to `delta_over_omega[i]`, `rb_over_a[j]`.
    pub values: Vec<Vec<f64>>,
}

impl PhaseDiagram {
    /// Row-major `(Δ/Ω, R_b/a, max S_e)` triples.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.delta_over_omega
            .iter()
            .enumerate()
            .flat_map(move |(i, &d)| {
                self.rb_over_a
                    .iter()
                    .enumerate()
                    .map(move |(j, &r)| (d, r, self.values[i][j]))
            })
    }
}

/// Settings shared by every point of an entropy sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub window: f64,
    pub n_samples: usize,
    pub krylov: KrylovConfig,
    pub basis: BasisKind,
    pub initial: InitialState,
}

fn check_axis(name: &'static str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::invalid(name, "grid axis is empty"));
    }
    if axis.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            name,
            "grid axis must be strictly increasing",
        ));
    }
    if axis.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "grid values must be finite"));
    }
    Ok(())
}

/// Entropy trace for the central-excitation quench at one (Δ/Ω, R_b/a).
///
/// R_b/a is realised by rescaling the spacing a at fixed Ω and C6.
pub fn point_trace(
    base: &HamiltonianSpec,
    delta_over_omega: f64,
    rb_over_a: f64,
    settings: &SweepSettings,
) -> Result<EntropyTrace> {
    let mut params = base.params;
    params.detuning = delta_over_omega * params.rabi;
    let geom = LadderGeometry::from_blockade_ratio(
        base.geometry.n_rungs,
        rb_over_a,
        base.geometry.inv_aspect_ratio,
        &params,
    )?;
    let spec = HamiltonianSpec {
        geometry: geom.clone(),
        params,
        local_detunings: base.local_detunings.clone(),
        max_atoms: base.max_atoms,
    };
    let basis = Arc::new(settings.basis.build(&geom, base.max_atoms)?);
    let psi0 = settings
        .initial
        .prepare(&geom, &params, basis.clone(), settings.krylov)?;
    let h = Hamiltonian::new(&spec, basis)?;
    entropy_trace(
        &h,
        &geom,
        &psi0,
        settings.window,
        settings.n_samples,
        settings.krylov,
    )
}

/// Evaluates every grid point in parallel; `progress(done, total)` is called
/// as points finish.
pub fn max_entropy_sweep(
    base: &HamiltonianSpec,
    delta_over_omega: &[f64],
    rb_over_a: &[f64],
    settings: &SweepSettings,
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<PhaseDiagram> {
    check_axis("delta_over_omega", delta_over_omega)?;
    check_axis("rb_over_a", rb_over_a)?;
    if !(settings.window >= 0.0) {
        return Err(Error::invalid("window", "must be ≥ 0"));
    }
    let total = delta_over_omega.len() * rb_over_a.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let flat: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / rb_over_a.len(), k % rb_over_a.len());
            let trace = point_trace(base, delta_over_omega[i], rb_over_a[j], settings)?;
            let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            progress(n, total);
            Ok(trace.max())
        })
        .collect::<Result<_>>()?;
    Ok(PhaseDiagram {
        delta_over_omega: delta_over_omega.to_vec(),
        rb_over_a: rb_over_a.to_vec(),
        window: settings.window,
        values: flat.chunks(rb_over_a.len()).map(<[f64]>::to_vec).collect(),
    })
}
