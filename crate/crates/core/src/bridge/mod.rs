//! Event-generator boundary: parton pairs in, hadron records out.
//!
//! Events arrive as JSON lines
//! `{"event_id", "q", "qbar", "p_q": [E,px,py,pz], "p_qbar": [...]}` in GeV.

mod events;
mod kinematics;
mod pipeline;

pub use events::{parse_event_line, parse_events, ParsedEvents, PartonEvent};
pub use kinematics::{boost_to_rest_frame, invariant_mass, FourMomentum, MASS_SQR_SLACK};
pub use pipeline::{
    compare_histograms, event_seed, read_reference_histogram, run_pipeline, write_comparison_csv,
    write_histogram_csv, write_records_jsonl, EventFailure, EventSummary, HadronRecord,
    HistogramComparison, MesonRecord, PipelineConfig, PipelineOutput,
};

#[cfg(test)]
mod tests;
