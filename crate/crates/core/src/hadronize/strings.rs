use serde::{Deserialize, Serialize};

use super::decode::FieldConfig;

/// Maximal run of equal non-zero field. Rungs are numbered from 1.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringSegment {
    pub start_rung: usize,
    pub end_rung: usize,
    pub sign: i8,
}

impl StringSegment {
    pub fn length(&self) -> usize {
        self.end_rung - self.start_rung + 1
    }

    /// Charges on the left and right boundary links, with zero field outside.
    pub fn endpoint_charges(&self) -> (i8, i8) {
        (self.sign, -self.sign)
    }
}

pub fn extract_strings(cfg: &FieldConfig) -> Vec<StringSegment> {
    let mut out: Vec<StringSegment> = Vec::new();
    for (i, &e) in cfg.values.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let rung = i + 1;
        match out.last_mut() {
            Some(s) if s.end_rung + 1 == rung && s.sign == e => s.end_rung = rung,
            _ => out.push(StringSegment {
                start_rung: rung,
                end_rung: rung,
                sign: e,
            }),
        }
    }
    out
}
