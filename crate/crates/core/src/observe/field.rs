use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::lattice::{stagger_sign, LadderGeometry, BOTTOM, TOP};

/// Per-rung staggered field statistics of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldExpectation {
    /// ⟨E_j⟩
    pub mean: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub p_zero: Vec<f64>,
    pub p_plus: Vec<f64>,
    /// Weight of the blockade-violating |rr⟩ rung state.
    pub p_rr: Vec<f64>,
}

impl FieldExpectation {
    pub fn n_rungs(&self) -> usize {
        self.mean.len()
    }
}

/// Field value of zero-based `rung` in a basis mask; `None` for |rr⟩.
pub fn rung_field(mask: u64, rung: usize) -> Option<i8> {
    let top = (mask >> (2 * rung + TOP)) & 1;
    let bottom = (mask >> (2 * rung + BOTTOM)) & 1;
    match (top, bottom) {
        (0, 0) => Some(0),
        (1, 0) => Some(stagger_sign(rung)),
        (0, 1) => Some(-stagger_sign(rung)),
        _ => None,
    }
}

/// ⟨E_j⟩ = (⟨n_top,j⟩ − ⟨n_bottom,j⟩)·(−1)^{j+1} and the rung-state weights.
pub fn field_expectations(psi: &StateVector, geom: &LadderGeometry) -> Result<FieldExpectation> {
    psi.check_normalized()?;
    let n = geom.n_rungs;
    if psi.n_atoms() != geom.n_atoms() {
        return Err(Error::DimensionMismatch {
            expected: geom.n_atoms(),
            got: psi.n_atoms(),
        });
    }
    // Slots per rung: P(−1), P(0), P(+1), P(rr).
    let w = psi.reduce_weights(4 * n, |mask, p, acc| {
        for rung in 0..n {
            let slot = match rung_field(mask, rung) {
                Some(e) => (e + 1) as usize,
                None => 3,
            };
            acc[4 * rung + slot] += p;
        }
    });
    let pick = |slot: usize| (0..n).map(|r| w[4 * r + slot]).collect::<Vec<f64>>();
    let (p_minus, p_zero, p_plus, p_rr) = (pick(0), pick(1), pick(2), pick(3));
    let mean = p_plus.iter().zip(&p_minus).map(|(p, m)| p - m).collect();
    Ok(FieldExpectation {
        mean,
        p_minus,
        p_zero,
        p_plus,
        p_rr,
    })
}

/// Gauss' law on links: Q_{i,i+1} = E_{i+1} − E_i.
pub fn charges_from_field(field: &[f64]) -> Result<Vec<f64>> {
    if field.len() < 2 {
        return Err(Error::invalid(
            "field",
            "need at least two rungs for a link",
        ));
    }
    Ok(field.windows(2).map(|w| w[1] - w[0]).collect())
}
