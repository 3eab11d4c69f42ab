//! The measurement apparatus: polarization-dependent filter, D/A/R/L
//! projections, time gating and photon counting.

mod counting;
pub mod csv;
mod experiment;
mod filter;
mod gate;
mod projection;

pub use counting::{poisson_draw, sample_counts, CountRecord};
pub use experiment::{run_experiment, DelayScan, ExperimentConfig, ExperimentOutput, Noise};
pub use filter::{filtered_reference, filtered_reference_with, FilterSpec, ReferenceEnvelope, ReferenceMode};
pub use gate::{gate_convolve, GateShape, GateSpec};
pub use projection::{projection_probabilities, projection_set, Polarization, PolarizationSet, ProjectionDistribution};
