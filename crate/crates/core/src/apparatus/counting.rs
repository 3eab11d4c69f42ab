use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::projection::{Polarization, ProjectionDistribution};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Integer photon counts per delay point for one polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub grid: TimeGrid,
    pub pol: Polarization,
    pub counts: Vec<u64>,
    pub exposure_pulses: u64,
    pub mean_photons_per_pulse: f64,
    pub detection_efficiency: f64,
    pub seed: u64,
}

impl CountRecord {
    pub fn new(
        grid: TimeGrid,
        pol: Polarization,
        counts: Vec<u64>,
        exposure_pulses: u64,
        mean_photons_per_pulse: f64,
        detection_efficiency: f64,
        seed: u64,
    ) -> Result<Self> {
        if counts.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        check_rates(mean_photons_per_pulse, detection_efficiency)?;
        Ok(CountRecord {
            grid,
            pol,
            counts,
            exposure_pulses,
            mean_photons_per_pulse,
            detection_efficiency,
            seed,
        })
    }

    /// Expected counts per unit probability density: `λ_j = scale · P_j`.
    pub fn scale(&self) -> f64 {
        count_scale(
            self.exposure_pulses,
            self.mean_photons_per_pulse,
            self.detection_efficiency,
            self.grid.dt(),
        )
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// True when two records can be combined point by point.
    pub fn same_exposure(&self, other: &CountRecord) -> bool {
        self.grid.matches(&other.grid)
            && self.exposure_pulses == other.exposure_pulses
            && self.mean_photons_per_pulse == other.mean_photons_per_pulse
            && self.detection_efficiency == other.detection_efficiency
    }
}

fn check_rates(mean: f64, efficiency: f64) -> Result<()> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::param(
            "mean_photons_per_pulse",
            format!("must be finite and >= 0, got {mean}"),
        ));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::param(
            "detection_efficiency",
            format!("must lie in (0, 1], got {efficiency}"),
        ));
    }
    Ok(())
}

pub(crate) fn count_scale(exposure_pulses: u64, mean: f64, efficiency: f64, dt: f64) -> f64 {
    exposure_pulses as f64 * mean * efficiency * dt
}

/// Generator for one (seed, point, polarization) cell. ChaCha is a counter
/// cipher, so giving each cell its own stream makes draws independent of
/// evaluation order.
fn keyed_rng(seed: u64, index: usize, pol: Polarization) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64) << 2) | pol.code());
    rng
}

/// One Poisson draw with mean `lambda` from the keyed stream.
pub fn poisson_draw(lambda: f64, seed: u64, index: usize, pol: Polarization) -> Result<u64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::param("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(lambda).map_err(|e| Error::param("lambda", e.to_string()))?;
    let x: f64 = dist.sample(&mut keyed_rng(seed, index, pol));
    Ok(x as u64)
}

/// Poisson counts with `λ_j = exposure · mean · efficiency · P_j · dt`.
pub fn sample_counts(
    p: &ProjectionDistribution,
    exposure_pulses: u64,
    mean_photons_per_pulse: f64,
    efficiency: f64,
    seed: u64,
) -> Result<CountRecord> {
    check_rates(mean_photons_per_pulse, efficiency)?;
    let scale = count_scale(exposure_pulses, mean_photons_per_pulse, efficiency, p.grid().dt());
    let counts = p
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| poisson_draw(scale * v, seed, j, p.pol()))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountRecord {
        grid: *p.grid(),
        pol: p.pol(),
        counts,
        exposure_pulses,
        mean_photons_per_pulse,
        detection_efficiency: efficiency,
        seed,
    })
}
