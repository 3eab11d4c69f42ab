use serde::{Deserialize, Serialize};

use super::counting::{sample_counts, CountRecord};
use super::filter::{filtered_reference_with, FilterSpec, ReferenceEnvelope, ReferenceMode};
use super::gate::{gate_convolve, GateSpec};
use super::projection::{projection_set, PolarizationSet, ProjectionDistribution};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::signal_prep::{spectrum_to_temporal, SpectralWavefunction, StateSpec, TemporalEnvelope};

/// Gate-delay positions at which the projections are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub n_points: usize,
    pub step: f64,
    pub center: f64,
}

impl Default for DelayScan {
    fn default() -> Self {
        DelayScan {
            n_points: 585,
            step: 0.02,
            center: 0.0,
        }
    }
}

impl DelayScan {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::measurement(self.n_points, self.step, self.center)
    }

    /// Indices of the scan points on `sim`. The step and center must fall on
    /// the simulation lattice and the scan must lie inside it.
    pub fn indices_on(&self, sim: &TimeGrid) -> Result<Vec<usize>> {
        let scan = self.grid()?;
        let stride = self.step / sim.dt();
        let offset = (self.center - sim.t_center()) / sim.dt();
        let on_lattice = |x: f64| (x - x.round()).abs() < 1e-6;
        if stride.round() < 1.0 || !on_lattice(stride) || !on_lattice(offset) {
            return Err(Error::param(
                "scan",
                format!(
                    "step {} ps and center {} ps must be multiples of dt = {} ps",
                    self.step,
                    self.center,
                    sim.dt()
                ),
            ));
        }
        if scan.t_min() < sim.t_min() - 1e-9 || scan.t_max() > sim.t_max() + 1e-9 {
            return Err(Error::OutsideGrid {
                what: "delay scan",
                value: scan.t_max().max(-scan.t_min()),
                lo: sim.t_min(),
                hi: sim.t_max(),
            });
        }
        let base = sim.center_index() as i64 + offset.round() as i64;
        let stride = stride.round() as i64;
        let c = scan.center_index() as i64;
        Ok((0..self.n_points as i64)
            .map(|j| (base + (j - c) * stride) as usize)
            .collect())
    }
}

/// Photon-counting parameters. `Noiseless` keeps probability densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Noise {
    Noiseless,
    Counting {
        exposure_pulses: u64,
        mean_photons_per_pulse: f64,
        efficiency: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub state: StateSpec,
    pub grid: TimeGrid,
    pub filter: FilterSpec,
    pub reference_mode: ReferenceMode,
    pub gate: GateSpec,
    pub scan: DelayScan,
    pub noise: Noise,
    pub seed: u64,
}

/// Everything a run produces: ground truth and the recorded data.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spectrum: SpectralWavefunction,
    pub envelope: TemporalEnvelope,
    pub reference: ReferenceEnvelope,
    /// Ground-truth envelope at the scan points.
    pub truth_on_scan: TemporalEnvelope,
    /// Gated projection densities at the scan points.
    pub probabilities: PolarizationSet<ProjectionDistribution>,
    pub counts: Option<PolarizationSet<CountRecord>>,
}

impl ExperimentOutput {
    pub fn scan_grid(&self) -> &TimeGrid {
        self.truth_on_scan.grid()
    }
}

/// State preparation, filtering, projection, gating, delay sampling and
/// (optionally) photon counting, in that order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let spectrum = cfg.state.spectrum(&cfg.grid.conjugate())?;
    let envelope = spectrum_to_temporal(&spectrum);
    let reference = filtered_reference_with(&spectrum, &cfg.filter, cfg.reference_mode)?;
    let projections = projection_set(&envelope, &reference)?;
    let gated = PolarizationSet::try_from_fn(|p| gate_convolve(&projections[p], &cfg.gate))?;

    let idx = cfg.scan.indices_on(&cfg.grid)?;
    let scan = cfg.scan.grid()?;
    let probabilities = gated.map(|_, d| d.select(scan, &idx));
    let truth_on_scan = TemporalEnvelope::from_parts(scan, idx.iter().map(|&j| envelope.amplitudes()[j]).collect());

    let counts = match cfg.noise {
        Noise::Noiseless => None,
        Noise::Counting {
            exposure_pulses,
            mean_photons_per_pulse,
            efficiency,
        } => Some(PolarizationSet::try_from_fn(|p| {
            sample_counts(
                &probabilities[p],
                exposure_pulses,
                mean_photons_per_pulse,
                efficiency,
                cfg.seed,
            )
        })?),
    };

    Ok(ExperimentOutput {
        spectrum,
        envelope,
        reference,
        truth_on_scan,
        probabilities,
        counts,
    })
}
