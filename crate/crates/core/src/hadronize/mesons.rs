use serde::{Deserialize, Serialize};

use super::strings::StringSegment;
use crate::error::{Error, Result};
use crate::lattice::{central_rung, LadderGeometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meson {
    /// String length in rungs.
    pub length: usize,
    pub energy_gev: f64,
    /// Fraction of the maximal signal speed, in [−1, 1].
    pub velocity: f64,
    pub mass_gev: f64,
    /// Midpoint of the string relative to the central rung (rungs).
    pub center_rung: f64,
    pub start_rung: usize,
    pub end_rung: usize,
    /// Charges at the left and right ends.
    pub charges: (i8, i8),
}

/// Splits `total_energy` over strings in proportion to their lengths. The
/// last entry absorbs the rounding residue so the sum is exact.
pub fn apportion_energy(strings: &[StringSegment], total_energy: f64) -> Result<Vec<f64>> {
    if !(total_energy > 0.0 && total_energy.is_finite()) {
        return Err(Error::invalid(
            "total_energy",
            format!("must be > 0, got {total_energy}"),
        ));
    }
    if strings.is_empty() {
        return Ok(Vec::new());
    }
    let total_len: usize = strings.iter().map(StringSegment::length).sum();
    let mut out: Vec<f64> = strings
        .iter()
        .map(|s| total_energy * s.length() as f64 / total_len as f64)
        .collect();
    let head: f64 = out[..out.len() - 1].iter().sum();
    *out.last_mut().unwrap() = total_energy - head;
    Ok(out)
}

/// Distance from the central rung to the farther ladder end (rungs).
pub fn half_chain_length(n_rungs: usize) -> f64 {
    let c = central_rung(n_rungs);
    c.max(n_rungs - 1 - c) as f64
}

/// Velocity and mass of a string turned meson.
///
/// The velocity is the mean displacement of the two string ends from the
/// central rung divided by the half-chain length; the mass follows from
/// m = E·sqrt(1 − v²).
pub fn meson_kinematics(s: &StringSegment, energy: f64, geom: &LadderGeometry) -> Result<Meson> {
    if !(energy > 0.0) {
        return Err(Error::Kinematics(format!(
            "meson energy must be > 0, got {energy}"
        )));
    }
    if s.start_rung == 0 || s.end_rung < s.start_rung || s.end_rung > geom.n_rungs {
        return Err(Error::Kinematics(format!(
            "string {}..{} does not fit on {} rungs",
            s.start_rung, s.end_rung, geom.n_rungs
        )));
    }
    let center = (central_rung(geom.n_rungs) + 1) as f64;
    let left = s.start_rung as f64 - center;
    let right = s.end_rung as f64 - center;
    let mid = 0.5 * (left + right);
    let half = half_chain_length(geom.n_rungs);
    let velocity = if half > 0.0 { mid / half } else { 0.0 };
    if velocity.abs() > 1.0 {
        return Err(Error::Kinematics(format!(
            "|v| = {} exceeds 1",
            velocity.abs()
        )));
    }
    Ok(Meson {
        length: s.length(),
        energy_gev: energy,
        velocity,
        mass_gev: energy * (1.0 - velocity * velocity).sqrt(),
        center_rung: mid,
        start_rung: s.start_rung,
        end_rung: s.end_rung,
        charges: s.endpoint_charges(),
    })
}
