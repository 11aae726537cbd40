use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::kinematics::{boost_to_rest_frame, invariant_mass, FourMomentum};
use crate::error::{Error, Result};

/// A quark–antiquark pair from an event generator.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartonEvent {
    pub event_id: u64,
    /// Flavour id of the quark.
    pub q: i32,
    /// Flavour id of the antiquark.
    pub qbar: i32,
    pub p_q: FourMomentum,
    pub p_qbar: FourMomentum,
}

impl PartonEvent {
    pub fn validate(&self) -> Result<()> {
        self.p_q.validate()?;
        self.p_qbar.validate()?;
        if !(self.e_cm()? > 0.0) {
            return Err(Error::Kinematics("pair has zero invariant mass".into()));
        }
        Ok(())
    }

    /// Pair invariant mass, i.e. the energy in the rest frame.
    pub fn e_cm(&self) -> Result<f64> {
        invariant_mass(&self.p_q, &self.p_qbar)
    }

    pub fn to_rest_frame(&self) -> Result<PartonEvent> {
        let (p_q, p_qbar) = boost_to_rest_frame(&self.p_q, &self.p_qbar)?;
        Ok(PartonEvent {
            p_q,
            p_qbar,
            ..*self
        })
    }
}

/// Result of reading an event stream: good events plus per-line failures.
#[derive(Debug, Default)]
pub struct ParsedEvents {
    pub events: Vec<PartonEvent>,
    /// [`Error::MalformedEvent`] for each rejected line.
    pub errors: Vec<Error>,
}

pub fn parse_event_line(line: &str, line_no: usize) -> Result<PartonEvent> {
    let malformed = |reason: String| Error::MalformedEvent {
        line: line_no,
        reason,
    };
    let ev: PartonEvent = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    ev.validate().map_err(|e| malformed(e.to_string()))?;
    Ok(ev)
}

/// Reads JSON-lines events. Blank lines are skipped; line numbers are 1-based.
/// Only I/O failures abort; bad lines land in [`ParsedEvents::errors`].
pub fn parse_events<R: BufRead>(reader: R) -> Result<ParsedEvents> {
    let mut out = ParsedEvents::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_event_line(&line, i + 1) {
            Ok(ev) => out.events.push(ev),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}
