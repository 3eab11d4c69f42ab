use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::math::sinc;
use crate::signal_prep::{spectrum_to_temporal, SpectralWavefunction};

/// Reference strength below which a [`ReferenceEnvelope`] is flagged, relative
/// to a flat spectrum at the signal's peak spectral amplitude.
const LOW_REFERENCE_RATIO: f64 = 0.05;

/// Rect filter of full width `delta_w` (rad/ps) acting on the H polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub delta_w: f64,
    /// Offset of the pass-band center from the carrier (rad/ps).
    pub center: f64,
}

impl FilterSpec {
    pub fn new(delta_w: f64, center: f64) -> Result<Self> {
        if !(delta_w.is_finite() && delta_w > 0.0) {
            return Err(Error::param("delta_w", format!("must be positive, got {delta_w}")));
        }
        if !center.is_finite() {
            return Err(Error::param("filter center", "must be finite"));
        }
        Ok(FilterSpec { delta_w, center })
    }

    /// Spacing between the central zeros of the reference sinc, `4π / δω`:
    /// the measurable time window.
    pub fn window_width(&self) -> f64 {
        4.0 * PI / self.delta_w
    }

    /// `sinc(δω t / 2)`.
    pub fn sinc_at(&self, t: f64) -> f64 {
        sinc(self.delta_w * t / 2.0)
    }
}

/// How the H-branch amplitude is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ReferenceMode {
    /// Integral of the sampled spectrum over the filter band.
    #[default]
    Exact,
    /// Spectrum taken as constant across the band, equal to its value at the
    /// filter center: `ψ̃(center) δω sinc(δωt/2) e^{i·center·t} / √(2π)`.
    ConstantSpectrum,
}

/// H-branch temporal amplitude after the frequency filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEnvelope {
    grid: TimeGrid,
    amplitudes: Vec<Complex64>,
    low_reference: bool,
}

impl ReferenceEnvelope {
    pub fn new(grid: TimeGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ReferenceEnvelope {
            grid,
            amplitudes,
            low_reference: false,
        })
    }

    /// A reference that is identically zero.
    pub fn zero(grid: TimeGrid) -> Self {
        ReferenceEnvelope {
            grid,
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.len()],
            low_reference: true,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Set when the signal spectrum is (nearly) empty at the filter center, so
    /// the interference terms carry little information.
    pub fn low_reference(&self) -> bool {
        self.low_reference
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// H-branch reference using the exact band integral.
pub fn filtered_reference(signal: &SpectralWavefunction, filter: &FilterSpec) -> Result<ReferenceEnvelope> {
    filtered_reference_with(signal, filter, ReferenceMode::Exact)
}

/// H-branch reference `f(t) = (2π)^{-1/2} ∫ rect((ω-c)/δω) ψ̃(ω) e^{iωt} dω`.
///
/// In [`ReferenceMode::Exact`] each spectral sample stands for its whole
/// frequency cell, and every cell overlapping the band contributes the closed
/// form `ψ̃_k h e^{iω_m t} sinc(h t/2)` for its overlap of width `h` and
/// midpoint `ω_m`. A spectrum that is flat across the band therefore yields
/// an exact sinc; a band covering the whole grid yields `ψ_env(t)·sinc(dw t/2)`.
pub fn filtered_reference_with(
    signal: &SpectralWavefunction,
    filter: &FilterSpec,
    mode: ReferenceMode,
) -> Result<ReferenceEnvelope> {
    let fg = signal.grid();
    let dw = fg.dw();
    if filter.delta_w < 2.0 * dw {
        return Err(Error::GridTooCoarse {
            what: "filter band",
            width: filter.delta_w,
            dw,
            min_samples: 2.0,
        });
    }
    let lo = filter.center - filter.delta_w / 2.0;
    let hi = filter.center + filter.delta_w / 2.0;
    let tg = fg.conjugate(0.0);
    let norm = (2.0 * PI).sqrt().recip();

    let amplitudes: Vec<Complex64> = match mode {
        ReferenceMode::ConstantSpectrum => {
            let value = signal.cell_value(filter.center);
            tg.times()
                .into_iter()
                .map(|t| {
                    value * norm * filter.delta_w * filter.sinc_at(t) * Complex64::from_polar(1.0, filter.center * t)
                })
                .collect()
        }
        ReferenceMode::Exact => {
            // Cells fully inside the band go through one FFT; the two partial
            // edge cells are added in closed form.
            let mut full = vec![Complex64::new(0.0, 0.0); fg.len()];
            let mut partial = Vec::new();
            for (k, &a) in signal.amplitudes().iter().enumerate() {
                let w = fg.w(k);
                let a_lo = (w - dw / 2.0).max(lo);
                let a_hi = (w + dw / 2.0).min(hi);
                if a_hi <= a_lo || a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if a_lo == w - dw / 2.0 && a_hi == w + dw / 2.0 {
                    full[k] = a;
                } else {
                    partial.push((a, a_hi - a_lo, 0.5 * (a_lo + a_hi)));
                }
            }
            let body = spectrum_to_temporal(&SpectralWavefunction::from_parts(*fg, full));
            body.amplitudes()
                .iter()
                .enumerate()
                .map(|(j, &b)| {
                    let t = tg.t(j);
                    let edges: Complex64 = partial
                        .iter()
                        .map(|&(a, h, mid)| a * h * sinc(h * t / 2.0) * Complex64::from_polar(1.0, mid * t))
                        .sum();
                    b * sinc(dw * t / 2.0) + edges * norm
                })
                .collect()
        }
    };

    let spectral_peak = signal.peak_magnitude();
    let flat = norm * filter.delta_w * spectral_peak;
    let peak = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let low_reference = signal.cell_value(filter.center).norm() < LOW_REFERENCE_RATIO * spectral_peak
        || peak < LOW_REFERENCE_RATIO * flat;

    Ok(ReferenceEnvelope {
        grid: tg,
        amplitudes,
        low_reference,
    })
}
