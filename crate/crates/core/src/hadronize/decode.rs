use serde::{Deserialize, Serialize};

use crate::lattice::LadderGeometry;
use crate::observe::rung_field;

/// Treatment of shots that break the field-representation constraints.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RrPolicy {
    /// Map offending rungs to E = 0 and count them.
    #[default]
    Zero,
    /// Reject the whole shot.
    Discard,
}

/// Per-rung spin-1 field values decoded from one shot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub values: Vec<i8>,
    /// Rungs measured as |rr⟩.
    pub rr_violations: usize,
    /// Rungs zeroed because they would put |Q| = 2 on their left link.
    pub gauss_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decoded {
    Accepted(FieldConfig),
    Rejected { rr_rungs: usize, gauss_links: usize },
}

/// Staggered spin-1 decoding of a measured bitmask.
///
/// Under [`RrPolicy::Zero`] the output always satisfies |Q| ≤ 1 on every link:
/// |rr⟩ rungs become 0, and a rung whose value is the negative of its left
/// neighbour's is zeroed too. [`RrPolicy::Discard`] rejects any shot needing
/// either repair.
pub fn decode_shot(mask: u64, geom: &LadderGeometry, policy: RrPolicy) -> Decoded {
    let n = geom.n_rungs;
    let mut values = Vec::with_capacity(n);
    let mut rr = 0;
    let mut gauss = 0;
    for rung in 0..n {
        let mut e = rung_field(mask, rung).unwrap_or_else(|| {
            rr += 1;
            0
        });
        if e != 0 && values.last() == Some(&-e) {
            gauss += 1;
            e = 0;
        }
        values.push(e);
    }
    match policy {
        RrPolicy::Discard if rr > 0 || gauss > 0 => Decoded::Rejected {
            rr_rungs: rr,
            gauss_links: gauss,
        },
        _ => Decoded::Accepted(FieldConfig {
            values,
            rr_violations: rr,
            gauss_violations: gauss,
        }),
    }
}

/// Q_{i,i+1} = E_{i+1} − E_i on integer fields.
pub fn link_charges(values: &[i8]) -> Vec<i8> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}
