use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::events::PartonEvent;
use crate::error::{Error, Result};
use crate::hadronize::{
    hadronize_state, shot_rng, HadronizationSetup, Meson, MultiplicityHistogram,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub setup: HadronizationSetup,
    pub n_shots: usize,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.setup.calibration.validate()?;
        if self.n_shots == 0 {
            return Err(Error::invalid("n_shots", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MesonRecord {
    pub length: usize,
    pub energy_gev: f64,
    pub velocity: f64,
    pub mass_gev: f64,
    pub center_rung: f64,
    pub start_rung: usize,
    pub end_rung: usize,
}

impl From<&Meson> for MesonRecord {
    fn from(m: &Meson) -> Self {
        Self {
            length: m.length,
            energy_gev: m.energy_gev,
            velocity: m.velocity,
            mass_gev: m.mass_gev,
            center_rung: m.center_rung,
            start_rung: m.start_rung,
            end_rung: m.end_rung,
        }
    }
}

/// One output line: the hadrons from one shot of one event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HadronRecord {
    pub event_id: u64,
    pub shot_id: u64,
    pub multiplicity: usize,
    pub mesons: Vec<MesonRecord>,
    pub rr_violations: usize,
    /// False for shots rejected under the discard policy.
    pub accepted: bool,
    pub e_cm: f64,
    pub delta_over_omega: f64,
    pub t_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub event_id: u64,
    pub e_cm: f64,
    pub delta_over_omega: f64,
    pub accepted_shots: u64,
    pub mean_multiplicity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFailure {
    pub event_id: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    /// Sorted by event id, then shot id.
    pub records: Vec<HadronRecord>,
    pub histogram: MultiplicityHistogram,
    pub events: Vec<EventSummary>,
    pub failures: Vec<EventFailure>,
}

/// Seed for the shots of one event, drawn from the run seed's stream `event_id`.
pub fn event_seed(seed: u64, event_id: u64) -> u64 {
    shot_rng(seed, event_id).next_u64()
}

struct Prepared {
    event_id: u64,
    e_cm: f64,
    ratio: f64,
}

fn prepare(ev: &PartonEvent, setup: &HadronizationSetup) -> Result<Prepared> {
    let rest = ev.to_rest_frame()?;
    let e_cm = rest.p_q.e + rest.p_qbar.e;
    Ok(Prepared {
        event_id: ev.event_id,
        e_cm,
        ratio: setup.calibration.detuning_from_energy(e_cm)?,
    })
}

/// Boost → E_cm → Δ/Ω → quench → shots → mesons for every event.
///
/// Events sharing a Δ/Ω share one quench. A failing event is reported in
/// [`PipelineOutput::failures`] and never aborts the others; only an invalid
/// configuration is an error.
pub fn run_pipeline(events: &[PartonEvent], cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut failures = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    let mut groups: BTreeMap<u64, Vec<Prepared>> = BTreeMap::new();
    for ev in events {
        if !seen.insert(ev.event_id) {
            failures.push(EventFailure {
                event_id: ev.event_id,
                message: "duplicate event id".into(),
            });
            continue;
        }
        match prepare(ev, &cfg.setup) {
            Ok(p) => groups.entry(p.ratio.to_bits()).or_default().push(p),
            Err(e) => failures.push(EventFailure {
                event_id: ev.event_id,
                message: e.to_string(),
            }),
        }
    }

    let groups: Vec<(f64, Vec<Prepared>)> = groups.into_values().map(|g| (g[0].ratio, g)).collect();
    type Outcome = std::result::Result<(EventSummary, Vec<HadronRecord>), String>;
    let results: Vec<Vec<(u64, Outcome)>> = groups
        .par_iter()
        .map(|(ratio, group)| {
            let psi = match cfg.setup.measurement_state(*ratio) {
                Ok(psi) => psi,
                Err(e) => {
                    let msg = e.to_string();
                    return group
                        .iter()
                        .map(|p| (p.event_id, Err(msg.clone())))
                        .collect();
                }
            };
            group
                .iter()
                .map(|p| {
                    let r = hadronize_prepared(p, &psi, cfg).map_err(|e| e.to_string());
                    (p.event_id, r)
                })
                .collect()
        })
        .collect();

    let mut out = PipelineOutput::default();
    for (event_id, r) in results.into_iter().flatten() {
        match r {
            Ok((summary, records)) => {
                out.events.push(summary);
                out.records.extend(records);
            }
            Err(message) => failures.push(EventFailure { event_id, message }),
        }
    }
    out.events.sort_by_key(|s| s.event_id);
    out.records.sort_by_key(|r| (r.event_id, r.shot_id));
    for r in out.records.iter().filter(|r| r.accepted) {
        out.histogram.add(r.multiplicity);
    }
    failures.sort_by_key(|f| f.event_id);
    out.failures = failures;
    Ok(out)
}

fn hadronize_prepared(
    p: &Prepared,
    psi: &crate::hilbert::StateVector,
    cfg: &PipelineConfig,
) -> Result<(EventSummary, Vec<HadronRecord>)> {
    let setup = &cfg.setup;
    let shots = hadronize_state(
        psi,
        &setup.geometry,
        setup.policy,
        p.e_cm,
        cfg.n_shots,
        event_seed(cfg.seed, p.event_id),
    )?;
    let hist = MultiplicityHistogram::from_shots(&shots);
    let summary = EventSummary {
        event_id: p.event_id,
        e_cm: p.e_cm,
        delta_over_omega: p.ratio,
        accepted_shots: hist.total(),
        mean_multiplicity: hist.mean(),
    };
    let records = shots
        .into_iter()
        .map(|s| HadronRecord {
            event_id: p.event_id,
            shot_id: s.shot_id,
            multiplicity: s.multiplicity,
            mesons: s.mesons.iter().map(MesonRecord::from).collect(),
            rr_violations: s.rr_violations,
            accepted: s.accepted,
            e_cm: p.e_cm,
            delta_over_omega: p.ratio,
            t_f: setup.t_f,
        })
        .collect();
    Ok((summary, records))
}

pub fn write_records_jsonl<W: Write>(mut w: W, records: &[HadronRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// `multiplicity,count,frequency`; only the header for an empty histogram.
pub fn write_histogram_csv<W: Write>(w: W, hist: &MultiplicityHistogram) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["multiplicity", "count", "frequency"])?;
    if hist.total() > 0 {
        for (m, c, f) in hist.rows() {
            out.serialize((m, c, f))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct ReferenceRow {
    multiplicity: usize,
    #[serde(default)]
    count: Option<f64>,
    #[serde(default)]
    frequency: Option<f64>,
}

/// Reads a reference multiplicity distribution (`multiplicity` plus a
/// `count` or `frequency` column) and normalises it.
pub fn read_reference_histogram<R: Read>(r: R) -> Result<BTreeMap<usize, f64>> {
    let mut rows = BTreeMap::new();
    for (i, row) in csv::Reader::from_reader(r)
        .deserialize::<ReferenceRow>()
        .enumerate()
    {
        let row = row?;
        let w = row
            .frequency
            .or(row.count)
            .ok_or_else(|| Error::MalformedEvent {
                line: i + 2,
                reason: "needs a count or frequency column".into(),
            })?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::MalformedEvent {
                line: i + 2,
                reason: format!("weight {w} is not a non-negative number"),
            });
        }
        *rows.entry(row.multiplicity).or_insert(0.0) += w;
    }
    let total: f64 = rows.values().sum();
    if total > 0.0 {
        rows.values_mut().for_each(|v| *v /= total);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramComparison {
    /// `(multiplicity, model frequency, reference frequency)`.
    pub rows: Vec<(usize, f64, f64)>,
    pub model_mean: f64,
    pub reference_mean: f64,
    /// Half the L1 distance between the two distributions.
    pub total_variation: f64,
}

pub fn compare_histograms(
    model: &MultiplicityHistogram,
    reference: &BTreeMap<usize, f64>,
) -> HistogramComparison {
    let model_freq: BTreeMap<usize, f64> = if model.total() > 0 {
        model.rows().into_iter().map(|(m, _, f)| (m, f)).collect()
    } else {
        BTreeMap::new()
    };
    let top = model_freq
        .keys()
        .chain(reference.keys())
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let rows: Vec<(usize, f64, f64)> = (0..top)
        .map(|m| {
            let a = model_freq.get(&m).copied().unwrap_or(0.0);
            let b = reference.get(&m).copied().unwrap_or(0.0);
            (m, a, b)
        })
        .collect();
    HistogramComparison {
        model_mean: model.mean(),
        reference_mean: reference.iter().map(|(&m, &f)| m as f64 * f).sum(),
        total_variation: 0.5 * rows.iter().map(|r| (r.1 - r.2).abs()).sum::<f64>(),
        rows,
    }
}

pub fn write_comparison_csv<W: Write>(w: W, cmp: &HistogramComparison) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["multiplicity", "model_frequency", "reference_frequency"])?;
    for row in &cmp.rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
