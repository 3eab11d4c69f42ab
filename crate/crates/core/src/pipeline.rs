//! End-to-end run: simulate, reconstruct, fit and score against ground truth.

use serde::Serialize;

use crate::analysis::{
    classical_fidelity, fit_phase_gradient, fit_sinc_width, rebinned_fidelity, Binned, Domain, FidelityReport,
    FitReport,
};
use crate::apparatus::{run_experiment, ExperimentOutput};
use crate::config::RunConfig;
use crate::error::Result;
use crate::reconstruct::{raw_from_counts, raw_from_probabilities, reconstruct, Reconstruction};
use crate::signal_prep::{SpectralWavefunction, TemporalEnvelope};

#[derive(Debug, Clone)]
pub struct RunResult {
    pub experiment: ExperimentOutput,
    pub reconstruction: Reconstruction,
    pub scores: Scores,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scores {
    pub time_fidelity: FidelityReport,
    pub frequency_fidelity: FidelityReport,
    pub sinc_fit: Option<FitReport>,
    pub phase_fit: Option<FitReport>,
}

/// `|ψ|²` of the reconstruction against the truth, over valid points only.
pub fn time_fidelity(rec: &Reconstruction, truth: &TemporalEnvelope) -> Result<FidelityReport> {
    let (p, q): (Vec<f64>, Vec<f64>) = rec
        .envelope()
        .amplitudes()
        .iter()
        .zip(truth.amplitudes())
        .zip(&rec.mask.valid)
        .filter(|(_, &v)| v)
        .map(|((a, b), _)| (a.norm_sqr(), b.norm_sqr()))
        .unzip();
    classical_fidelity(&p, &q, Domain::Time)
}

/// Spectral intensities, rebinned onto a shared grid.
pub fn frequency_fidelity(rec: &SpectralWavefunction, truth: &SpectralWavefunction) -> Result<FidelityReport> {
    let (pi, qi) = (rec.intensity(), truth.intensity());
    rebinned_fidelity(
        Binned {
            x0: rec.grid().w_min(),
            step: rec.grid().dw(),
            values: &pi,
        },
        Binned {
            x0: truth.grid().w_min(),
            step: truth.grid().dw(),
            values: &qi,
        },
        Domain::Frequency,
    )
}

/// Sinc-width fit of the magnitude over valid points and phase-gradient fit
/// over `peak ± half_window`. A failed fit is reported as `None`.
pub fn fit_reconstruction(rec: &Reconstruction, half_window: f64) -> (Option<FitReport>, Option<FitReport>) {
    fit_envelope(rec.envelope(), &rec.mask.valid, half_window)
}

/// Same fits on a bare envelope and validity mask.
pub fn fit_envelope(
    env: &TemporalEnvelope,
    valid: &[bool],
    half_window: f64,
) -> (Option<FitReport>, Option<FitReport>) {
    let sinc = fit_sinc_width(env.grid(), &env.magnitude(), Some(valid), None).ok();
    let g = env.grid();
    let tp = g.t(env.peak_index());
    let window = ((tp - half_window).max(g.t_min()), (tp + half_window).min(g.t_max()));
    let phase = fit_phase_gradient(env, window).ok();
    (sinc, phase)
}

pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    let experiment = run_experiment(&cfg.experiment()?)?;
    let raw = match &experiment.counts {
        Some(c) => raw_from_counts(c)?,
        None => raw_from_probabilities(&experiment.probabilities)?,
    };
    let reconstruction = reconstruct(&raw, &cfg.reconstruction()?)?;
    let (sinc_fit, phase_fit) = fit_reconstruction(&reconstruction, cfg.phase_window_half_ps);
    let scores = Scores {
        time_fidelity: time_fidelity(&reconstruction, &experiment.truth_on_scan)?,
        frequency_fidelity: frequency_fidelity(&reconstruction.spectrum.spectrum, &experiment.spectrum)?,
        sinc_fit,
        phase_fit,
    };
    Ok(RunResult {
        experiment,
        reconstruction,
        scores,
    })
}
