//! Simulation and direct reconstruction of ultrafast temporal wavefunctions.
//!
//! A signal pulse is shaped in the Fourier plane ([`signal_prep`]), split by a
//! polarization-dependent frequency filter that leaves a narrow-band
//! reference in the H polarization, projected onto D/A/R/L and time-gated
//! ([`apparatus`]). The complex envelope is then read off point by point from
//! the four projection probabilities ([`reconstruct`]) and evaluated with
//! sinc/phase fits and classical fidelities ([`analysis`]).
//!
//! Conventions: time in ps, angular frequency in rad/ps relative to the
//! carrier, `ψ(t) = (2π)^{-1/2} ∫ ψ̃(ω) e^{iωt} dω`.

// `!(x > 0.0)` is used on purpose so NaN falls into the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod apparatus;
pub mod config;
pub mod error;
pub mod grid;
pub mod math;
pub mod pipeline;
pub mod reconstruct;
pub mod signal_prep;

pub use apparatus::{
    CountRecord, FilterSpec, GateShape, GateSpec, Polarization, PolarizationSet, ProjectionDistribution,
    ReferenceEnvelope, ReferenceMode,
};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use grid::{FreqGrid, TimeGrid};
pub use signal_prep::{
    PassBand, PhaseStepSpec, SlitSpec, SpectralWavefunction, StateSpec, StripeMaskSpec, TemporalEnvelope,
};
