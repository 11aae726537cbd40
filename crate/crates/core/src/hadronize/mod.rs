//! Measurement, staggered decoding, string extraction and meson kinematics.

mod decode;
mod event;
mod mesons;
mod shots;
mod strings;

pub use decode::{decode_shot, link_charges, Decoded, FieldConfig, RrPolicy};
pub use event::{
    default_measurement_time, hadronize_at_detuning, hadronize_event, hadronize_mask,
    hadronize_state, Calibration, EventHadrons, HadronizationSetup, MultiplicityHistogram,
    ShotHadrons, REFERENCE_MEASUREMENT_TIME,
};
pub use mesons::{apportion_energy, half_chain_length, meson_kinematics, Meson};
pub use shots::{sample_shots, shot_rng, Shot};
pub use strings::{extract_strings, StringSegment};
