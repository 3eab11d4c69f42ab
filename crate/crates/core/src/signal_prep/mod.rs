//! Ground-truth states: spectral wavefunctions shaped in the Fourier plane
//! (slits, coverglass phase steps, stripe masks) and their temporal envelopes.

mod fourier;
mod states;

pub use fourier::{
    embed, spectrum_to_temporal, spectrum_to_temporal_at, temporal_to_spectrum, temporal_to_spectrum_at,
};
pub use states::{
    apply_phase_step, slit_spectrum, stripe_mask_spectrum, PassBand, PhaseStepSpec, SlitSpec, StateSpec, StripeMaskSpec,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FreqGrid, TimeGrid};

/// Complex spectral amplitude ψ̃_env(ω) sampled on a [`FreqGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWavefunction {
    grid: FreqGrid,
    amplitudes: Vec<Complex64>,
}

/// Complex temporal envelope ψ_env(t) sampled on a [`TimeGrid`].
///
/// Reconstructed envelopes may be unnormalized; generated states are
/// normalized so that `Σ |ψ|² dt = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalEnvelope {
    grid: TimeGrid,
    amplitudes: Vec<Complex64>,
}

macro_rules! wavefunction_common {
    ($ty:ident, $grid:ident, $step:ident) => {
        impl $ty {
            pub fn new(grid: $grid, amplitudes: Vec<Complex64>) -> Result<Self> {
                if amplitudes.len() != grid.len() {
                    return Err(Error::Data(format!(
                        "{} amplitudes for a grid of {} samples",
                        amplitudes.len(),
                        grid.len()
                    )));
                }
                if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
                    return Err(Error::Data("non-finite amplitude".into()));
                }
                Ok(Self { grid, amplitudes })
            }

            pub(crate) fn from_parts(grid: $grid, amplitudes: Vec<Complex64>) -> Self {
                debug_assert_eq!(grid.len(), amplitudes.len());
                Self { grid, amplitudes }
            }

            pub fn grid(&self) -> &$grid {
                &self.grid
            }

            pub fn amplitudes(&self) -> &[Complex64] {
                &self.amplitudes
            }

            pub fn into_amplitudes(self) -> Vec<Complex64> {
                self.amplitudes
            }

            /// `Σ |a|² · step`.
            pub fn norm_sq(&self) -> f64 {
                self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.$step()
            }

            pub fn normalized(&self) -> Result<Self> {
                let m = self.norm_sq();
                if !(m > 0.0) {
                    return Err(Error::ZeroMass);
                }
                Ok(self.scaled(Complex64::new(m.sqrt().recip(), 0.0)))
            }

            pub fn scaled(&self, c: Complex64) -> Self {
                Self {
                    grid: self.grid,
                    amplitudes: self.amplitudes.iter().map(|&a| a * c).collect(),
                }
            }

            pub fn intensity(&self) -> Vec<f64> {
                self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
            }

            pub fn magnitude(&self) -> Vec<f64> {
                self.amplitudes.iter().map(|a| a.norm()).collect()
            }

            pub fn peak_magnitude(&self) -> f64 {
                self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
            }

            /// Index of the largest-magnitude sample (first one on ties).
            pub fn peak_index(&self) -> usize {
                let mut best = 0;
                for (j, a) in self.amplitudes.iter().enumerate() {
                    if a.norm() > self.amplitudes[best].norm() {
                        best = j;
                    }
                }
                best
            }

            pub fn len(&self) -> usize {
                self.amplitudes.len()
            }

            pub fn is_empty(&self) -> bool {
                self.amplitudes.is_empty()
            }
        }
    };
}

wavefunction_common!(SpectralWavefunction, FreqGrid, dw);
wavefunction_common!(TemporalEnvelope, TimeGrid, dt);

impl SpectralWavefunction {
    /// Cell-average value at an arbitrary frequency: the amplitude of the
    /// sample whose cell contains `w`, zero outside the grid.
    pub fn cell_value(&self, w: f64) -> Complex64 {
        self.grid.cell_index(w).map(|k| self.amplitudes[k]).unwrap_or_default()
    }
}

impl TemporalEnvelope {
    /// Largest edge magnitude relative to the peak; generated states should
    /// keep this below 1e-6 (or accept periodic wrap-around).
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.peak_magnitude();
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.amplitudes[0].norm();
        let last = self.amplitudes[self.amplitudes.len() - 1].norm();
        first.max(last) / peak
    }
}
