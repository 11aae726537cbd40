use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LadderGeometry;

/// Largest supported atom count for state-vector work.
pub const DEFAULT_MAX_ATOMS: usize = 26;

/// Computational basis of an `n_atoms` register.
///
/// Bit `b` of a basis mask is set iff atom `b` is in |r⟩ (little-endian,
/// atom index = bit index). The full basis orders states by mask value; the
/// blockade basis keeps the surviving masks in increasing order.
#[derive(Clone, Debug, PartialEq)]
pub enum Basis {
    Full { n_atoms: usize },
    Blockade(BlockadeBasis),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockadeBasis {
    n_atoms: usize,
    radius: f64,
    masks: Vec<u64>,
}

impl Basis {
    pub fn full(n_atoms: usize, max_atoms: usize) -> Result<Self> {
        check_capacity(n_atoms, max_atoms)?;
        Ok(Basis::Full { n_atoms })
    }

    /// Basis without any pair of excitations closer than `radius` (μm).
    pub fn blockade(geom: &LadderGeometry, radius: f64, max_atoms: usize) -> Result<Self> {
        let n = geom.n_atoms();
        check_capacity(n, max_atoms)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("blockade_radius", "must be > 0"));
        }
        let conflicts: Vec<u64> = (0..n)
            .map(|j| {
                (0..n)
                    .filter(|&k| k != j && geom.distance(j, k) < radius)
                    .fold(0u64, |m, k| m | (1 << k))
            })
            .collect();
        let allowed = |s: u64| {
            let mut rest = s;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                if s & conflicts[j] != 0 {
                    return false;
                }
                rest &= rest - 1;
            }
            true
        };
        let masks: Vec<u64> = (0..1u64 << n)
            .into_par_iter()
            .filter(|&s| allowed(s))
            .collect();
        Ok(Basis::Blockade(BlockadeBasis {
            n_atoms: n,
            radius,
            masks,
        }))
    }

    pub fn n_atoms(&self) -> usize {
        match self {
            Basis::Full { n_atoms } => *n_atoms,
            Basis::Blockade(b) => b.n_atoms,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Full { n_atoms } => 1 << n_atoms,
            Basis::Blockade(b) => b.masks.len(),
        }
    }

    #[inline]
    pub fn mask(&self, index: usize) -> u64 {
        match self {
            Basis::Full { .. } => index as u64,
            Basis::Blockade(b) => b.masks[index],
        }
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        match self {
            Basis::Full { n_atoms } => (mask < 1u64 << n_atoms).then_some(mask as usize),
            Basis::Blockade(b) => b.masks.binary_search(&mask).ok(),
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Basis::Full { .. })
    }

    pub fn blockade_radius(&self) -> Option<f64> {
        match self {
            Basis::Full { .. } => None,
            Basis::Blockade(b) => Some(b.radius),
        }
    }
}

/// How to build the basis for a run.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisKind {
    #[default]
    Full,
    /// Drop states with two excitations closer than `radius` (μm).
    Blockade { radius: f64 },
}

impl BasisKind {
    pub fn build(&self, geom: &LadderGeometry, max_atoms: usize) -> Result<Basis> {
        match *self {
            BasisKind::Full => Basis::full(geom.n_atoms(), max_atoms),
            BasisKind::Blockade { radius } => Basis::blockade(geom, radius, max_atoms),
        }
    }
}

fn check_capacity(n_atoms: usize, max_atoms: usize) -> Result<()> {
    if n_atoms > max_atoms || n_atoms > 63 {
        return Err(Error::Capacity {
            atoms: n_atoms,
            limit: max_atoms.min(63),
            what: "state vectors",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_basis_indexing() {
        let b = Basis::full(4, DEFAULT_MAX_ATOMS).unwrap();
        assert_eq!(b.dim(), 16);
        assert_eq!(b.mask(5), 5);
        assert_eq!(b.index_of(5), Some(5));
        assert_eq!(b.index_of(16), None);
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(
            Basis::full(28, DEFAULT_MAX_ATOMS),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn blockade_basis_single_rung() {
        // h = 8 < radius 9: |rr⟩ is dropped.
        let g = LadderGeometry::new(1, 4.0, 2.0).unwrap();
        let b = Basis::blockade(&g, 9.0, DEFAULT_MAX_ATOMS).unwrap();
        assert_eq!(b.dim(), 3);
        assert_eq!(b.index_of(0b11), None);
        assert_eq!(b.index_of(0b10), Some(2));
    }

    #[test]
    fn blockade_basis_masks_are_sorted_and_independent() {
        let g = LadderGeometry::new(4, 4.0, 2.0).unwrap();
        let b = Basis::blockade(&g, 8.692, DEFAULT_MAX_ATOMS).unwrap();
        let masks: Vec<u64> = (0..b.dim()).map(|i| b.mask(i)).collect();
        assert!(masks.windows(2).all(|w| w[0] < w[1]));
        for &m in &masks {
            for j in 0..8 {
                for k in (j + 1)..8 {
                    if m >> j & 1 == 1 && m >> k & 1 == 1 {
                        assert!(g.distance(j, k) >= 8.692);
                    }
                }
            }
        }
    }
}
