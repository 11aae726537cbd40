//! Physical parameters, two-leg ladder geometry and van der Waals couplings.
//!
//! Atoms are indexed rung-major: atom `2·i + leg` for zero-based rung `i` and
//! `leg ∈ {TOP, BOTTOM}`. Rung `i` sits at `x = i·a`; the top atom at `y = 0`
//! and the bottom atom at `y = h = ρ·a`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TOP: usize = 0;
pub const BOTTOM: usize = 1;

/// Rabi frequency used throughout unless overridden (rad/μs).
pub const DEFAULT_RABI: f64 = 4.0 * PI;
/// C6 for the 70S₁/₂ state of ⁸⁷Rb (rad·μm⁶/μs).
pub const DEFAULT_C6: f64 = 862_690.0 * 2.0 * PI;
pub const DEFAULT_INV_ASPECT_RATIO: f64 = 2.0;

/// Drive and interaction constants of the Rydberg Hamiltonian.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Ω (rad/μs)
    pub rabi: f64,
    /// Global Δ (rad/μs)
    pub detuning: f64,
    /// C6 (rad·μm⁶/μs)
    pub c6: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            rabi: DEFAULT_RABI,
            detuning: 0.0,
            c6: DEFAULT_C6,
        }
    }
}

impl PhysicalParams {
    pub fn new(rabi: f64, detuning: f64, c6: f64) -> Result<Self> {
        let p = Self { rabi, detuning, c6 };
        p.validate()?;
        Ok(p)
    }

    /// Default Ω and C6 with Δ set from the ratio Δ/Ω.
    pub fn with_detuning_ratio(ratio: f64) -> Self {
        Self {
            detuning: ratio * DEFAULT_RABI,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi > 0.0 && self.rabi.is_finite()) {
            return Err(Error::invalid(
                "rabi",
                format!("must be > 0, got {}", self.rabi),
            ));
        }
        if !(self.c6 > 0.0 && self.c6.is_finite()) {
            return Err(Error::invalid(
                "c6",
                format!("must be > 0, got {}", self.c6),
            ));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }

    pub fn detuning_ratio(&self) -> f64 {
        self.detuning / self.rabi
    }
}

/// Blockade radius R_b = (C6/Ω)^(1/6), where the pair interaction equals Ω.
pub fn blockade_radius(params: &PhysicalParams) -> f64 {
    (params.c6 / params.rabi).powf(1.0 / 6.0)
}

/// Van der Waals potential C6 / r⁶.
pub fn pair_potential(params: &PhysicalParams, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::SingularDistance(0, 0));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(
            "r",
            format!("distance must be > 0, got {r}"),
        ));
    }
    Ok(params.c6 / r.powi(6))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderGeometry {
    pub n_rungs: usize,
    /// Spacing a between neighbouring rungs (μm).
    pub spacing: f64,
    /// ρ = h/a.
    pub inv_aspect_ratio: f64,
    /// (x, y) for every atom, in atom-index order (μm).
    pub positions: Vec<[f64; 2]>,
}

impl LadderGeometry {
    pub fn new(n_rungs: usize, spacing: f64, inv_aspect_ratio: f64) -> Result<Self> {
        if n_rungs == 0 {
            return Err(Error::invalid("n_rungs", "must be at least 1"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid("a", format!("must be > 0, got {spacing}")));
        }
        if !(inv_aspect_ratio > 0.0 && inv_aspect_ratio.is_finite()) {
            return Err(Error::invalid(
                "rho",
                format!("must be > 0, got {inv_aspect_ratio}"),
            ));
        }
        let h = inv_aspect_ratio * spacing;
        let positions = (0..n_rungs)
            .flat_map(|i| {
                let x = i as f64 * spacing;
                [[x, 0.0], [x, h]]
            })
            .collect();
        Ok(Self {
            n_rungs,
            spacing,
            inv_aspect_ratio,
            positions,
        })
    }

    /// Ladder whose spacing realises a given R_b/a for these parameters.
    pub fn from_blockade_ratio(
        n_rungs: usize,
        rb_over_a: f64,
        inv_aspect_ratio: f64,
        params: &PhysicalParams,
    ) -> Result<Self> {
        if !(rb_over_a > 0.0 && rb_over_a.is_finite()) {
            return Err(Error::invalid(
                "rb_over_a",
                format!("must be > 0, got {rb_over_a}"),
            ));
        }
        params.validate()?;
        Self::new(
            n_rungs,
            blockade_radius(params) / rb_over_a,
            inv_aspect_ratio,
        )
    }

    pub fn n_atoms(&self) -> usize {
        2 * self.n_rungs
    }

    /// h = ρ·a
    pub fn rung_height(&self) -> f64 {
        self.inv_aspect_ratio * self.spacing
    }

    /// Atom index for a zero-based rung and a leg.
    pub fn atom(rung: usize, leg: usize) -> usize {
        debug_assert!(leg < 2);
        2 * rung + leg
    }

    pub fn distance(&self, j: usize, k: usize) -> f64 {
        let [xj, yj] = self.positions[j];
        let [xk, yk] = self.positions[k];
        (xj - xk).hypot(yj - yk)
    }

    /// Horizontal extent of the ladder.
    pub fn x_extent(&self) -> f64 {
        (self.n_rungs - 1) as f64 * self.spacing
    }
}

/// Sign of the staggered field mapping for a zero-based rung: +1 on rungs
/// 1, 3, 5, … (one-based) and −1 on the others.
pub fn stagger_sign(rung: usize) -> i8 {
    if rung % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Atom that is excited when zero-based `rung` carries field `value ≠ 0`.
///
/// On odd (one-based) rungs E = +1 is |rg⟩ (top excited) and E = −1 is |gr⟩;
/// even rungs are swapped.
pub fn field_atom(rung: usize, value: i8) -> Option<usize> {
    match value * stagger_sign(rung) {
        0 => None,
        v if v > 0 => Some(LadderGeometry::atom(rung, TOP)),
        _ => Some(LadderGeometry::atom(rung, BOTTOM)),
    }
}

/// Zero-based index of the central rung (left of centre for even counts).
pub fn central_rung(n_rungs: usize) -> usize {
    (n_rungs - 1) / 2
}

/// All pairwise V_jk, stored as a packed upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTable {
    n_atoms: usize,
    packed: Vec<f64>,
}

impl InteractionTable {
    pub fn new(geom: &LadderGeometry, params: &PhysicalParams) -> Result<Self> {
        let n = geom.n_atoms();
        let mut packed = Vec::with_capacity(n * (n - 1) / 2);
        for j in 0..n {
            for k in (j + 1)..n {
                let r = geom.distance(j, k);
                if r == 0.0 {
                    return Err(Error::SingularDistance(j, k));
                }
                packed.push(pair_potential(params, r)?);
            }
        }
        Ok(Self { n_atoms: n, packed })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn len(&self) -> usize {
        self.packed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    fn offset(&self, j: usize, k: usize) -> usize {
        let (j, k) = if j < k { (j, k) } else { (k, j) };
        j * (2 * self.n_atoms - j - 1) / 2 + (k - j - 1)
    }

    /// V_jk; symmetric in its arguments. Panics on `j == k`.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        assert_ne!(j, k, "no self-interaction");
        self.packed[self.offset(j, k)]
    }

    /// Iterates `(j, k, V_jk)` over unordered pairs with `j < k`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_atoms;
        (0..n)
            .flat_map(move |j| ((j + 1)..n).map(move |k| (j, k)))
            .zip(self.packed.iter().copied())
            .map(|((j, k), v)| (j, k, v))
    }
}
