//! Staggered field and charge observables, half-chain entanglement entropy
//! and entropy phase-diagram sweeps.

mod entropy;
mod field;
mod sweep;

pub use entropy::{
    entropy_of_weights, entropy_trace, half_chain_entropy, kept_atoms, max_half_chain_entropy,
    schmidt_weights, EntropyTrace,
};
pub use field::{charges_from_field, field_expectations, rung_field, FieldExpectation};
pub use sweep::{max_entropy_sweep, point_trace, PhaseDiagram, SweepSettings};

#[cfg(test)]
mod tests;
