use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpectralWavefunction;
use crate::error::{Error, Result};
use crate::grid::FreqGrid;

/// Minimum number of frequency samples a shaped band must span.
const MIN_BAND_SAMPLES: f64 = 4.0;

/// Variable slit in the Fourier plane. Gap width `w_mm` and gap-center
/// displacement `s_mm` map to a spectral band of width `alpha * w_mm`
/// centered at `alpha * s_mm` (rad/ps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitSpec {
    pub w_mm: f64,
    pub s_mm: f64,
    /// Frequency-to-position constant, rad/ps per mm.
    pub alpha: f64,
}

impl SlitSpec {
    pub fn new(w_mm: f64, s_mm: f64, alpha: f64) -> Result<Self> {
        if !(w_mm.is_finite() && w_mm > 0.0) {
            return Err(Error::param("w_mm", format!("must be positive, got {w_mm}")));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if !s_mm.is_finite() {
            return Err(Error::param("s_mm", "must be finite"));
        }
        Ok(SlitSpec { w_mm, s_mm, alpha })
    }

    /// Spectral full width Δω (rad/ps).
    pub fn width(&self) -> f64 {
        self.alpha * self.w_mm
    }

    /// Spectral center ω_c (rad/ps).
    pub fn center(&self) -> f64 {
        self.alpha * self.s_mm
    }

    /// Spacing between the two central zeros of the temporal sinc, `4π / Δω`.
    pub fn expected_zero_spacing(&self) -> f64 {
        4.0 * PI / self.width()
    }
}

/// Phase jump `step` applied to every frequency at or above `boundary`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseStepSpec {
    /// rad/ps, relative to the carrier.
    pub boundary: f64,
    /// rad, canonicalized to (-π, π].
    pub step: f64,
}

impl PhaseStepSpec {
    pub fn new(boundary: f64, step: f64) -> Result<Self> {
        if !boundary.is_finite() || !step.is_finite() {
            return Err(Error::param("phase_step", "boundary and step must be finite"));
        }
        Ok(PhaseStepSpec {
            boundary,
            step: canonical_angle(step),
        })
    }
}

/// Wraps an angle into (-π, π].
pub(crate) fn canonical_angle(x: f64) -> f64 {
    let wrapped = x - 2.0 * PI * ((x - PI) / (2.0 * PI)).ceil();
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// One transparent stripe of a mask, in Fourier-plane millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassBand {
    pub offset_mm: f64,
    pub width_mm: f64,
}

/// Stripe mask with coverglass phase steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripeMaskSpec {
    pub alpha: f64,
    /// Nominal opaque gap between neighbouring stripes (mm).
    pub gap_mm: f64,
    pub bands: Vec<PassBand>,
    pub steps: Vec<PhaseStepSpec>,
}

impl StripeMaskSpec {
    /// Validates ordering and disjointness of the pass-bands.
    pub fn new(alpha: f64, gap_mm: f64, bands: Vec<PassBand>, steps: Vec<PhaseStepSpec>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
        }
        if bands.is_empty() {
            return Err(Error::param("bands", "stripe mask needs at least one pass-band"));
        }
        for b in &bands {
            if !(b.width_mm.is_finite() && b.width_mm > 0.0) || !b.offset_mm.is_finite() {
                return Err(Error::param("bands", format!("invalid pass-band {b:?}")));
            }
        }
        for i in 1..bands.len() {
            let prev = &bands[i - 1];
            let cur = &bands[i];
            if cur.offset_mm - cur.width_mm / 2.0 < prev.offset_mm + prev.width_mm / 2.0 {
                return Err(Error::OverlappingBands(i - 1, i));
            }
        }
        Ok(StripeMaskSpec {
            alpha,
            gap_mm,
            bands,
            steps,
        })
    }

    /// `count` equal stripes of `width_mm`, separated by `gap_mm`, the first
    /// one centered at `first_center_mm`.
    pub fn uniform(
        alpha: f64,
        gap_mm: f64,
        width_mm: f64,
        count: usize,
        first_center_mm: f64,
        steps: Vec<PhaseStepSpec>,
    ) -> Result<Self> {
        let pitch = width_mm + gap_mm;
        let bands = (0..count)
            .map(|i| PassBand {
                offset_mm: first_center_mm + i as f64 * pitch,
                width_mm,
            })
            .collect();
        Self::new(alpha, gap_mm, bands, steps)
    }
}

/// The three state preparations, plus their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    Slit(SlitSpec),
    SlitWithGlass { slit: SlitSpec, glass: PhaseStepSpec },
    Stripe(StripeMaskSpec),
}

impl StateSpec {
    pub fn spectrum(&self, grid: &FreqGrid) -> Result<SpectralWavefunction> {
        match self {
            StateSpec::Slit(slit) => slit_spectrum(slit, grid),
            StateSpec::SlitWithGlass { slit, glass } => apply_phase_step(glass, &slit_spectrum(slit, grid)?),
            StateSpec::Stripe(mask) => stripe_mask_spectrum(mask, grid),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            StateSpec::Slit(_) => "slit",
            StateSpec::SlitWithGlass { .. } => "slit+glass",
            StateSpec::Stripe(_) => "stripe",
        }
    }
}

/// Fraction of each frequency cell `[ω_k - dw/2, ω_k + dw/2]` covered by `[lo, hi]`.
fn rect_cell_weights(grid: &FreqGrid, lo: f64, hi: f64) -> Vec<f64> {
    let dw = grid.dw();
    (0..grid.len())
        .map(|k| {
            let w = grid.w(k);
            let overlap = (w + dw / 2.0).min(hi) - (w - dw / 2.0).max(lo);
            (overlap / dw).clamp(0.0, 1.0)
        })
        .collect()
}

fn check_band(what: &'static str, grid: &FreqGrid, lo: f64, hi: f64) -> Result<()> {
    let width = hi - lo;
    if width < MIN_BAND_SAMPLES * grid.dw() {
        return Err(Error::GridTooCoarse {
            what,
            width,
            dw: grid.dw(),
            min_samples: MIN_BAND_SAMPLES,
        });
    }
    let (gl, gh) = (grid.w_min() - grid.dw() / 2.0, grid.w_max() + grid.dw() / 2.0);
    if lo < gl || hi > gh {
        let value = if lo < gl { lo } else { hi };
        return Err(Error::OutsideGrid {
            what,
            value,
            lo: gl,
            hi: gh,
        });
    }
    Ok(())
}

fn normalized(grid: &FreqGrid, amps: Vec<Complex64>) -> Result<SpectralWavefunction> {
    SpectralWavefunction::from_parts(*grid, amps).normalized()
}

/// Normalized `rect[(ω - ω_c)/Δω]` with `Δω = αw`, `ω_c = αs`.
///
/// Each sample carries the fraction of its frequency cell inside the rect, so
/// interior samples are 1, samples exactly on an edge are 1/2, and the total
/// weight equals `Δω / dw` for any edge placement.
pub fn slit_spectrum(spec: &SlitSpec, grid: &FreqGrid) -> Result<SpectralWavefunction> {
    let (lo, hi) = (spec.center() - spec.width() / 2.0, spec.center() + spec.width() / 2.0);
    check_band("slit band", grid, lo, hi)?;
    let amps = rect_cell_weights(grid, lo, hi)
        .into_iter()
        .map(|w| Complex64::new(w, 0.0))
        .collect();
    normalized(grid, amps)
}

/// Multiplies every sample at `ω ≥ boundary` by `e^{i·step}`.
pub fn apply_phase_step(spec: &PhaseStepSpec, input: &SpectralWavefunction) -> Result<SpectralWavefunction> {
    let grid = input.grid();
    if spec.boundary < grid.w_min() || spec.boundary > grid.w_max() {
        return Err(Error::OutsideGrid {
            what: "phase-step boundary",
            value: spec.boundary,
            lo: grid.w_min(),
            hi: grid.w_max(),
        });
    }
    let rot = Complex64::from_polar(1.0, spec.step);
    let amps = input
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, &a)| if grid.w(k) >= spec.boundary { a * rot } else { a })
        .collect();
    Ok(SpectralWavefunction::from_parts(*grid, amps))
}

/// Sum of the mask's disjoint pass-bands with its phase steps applied, normalized.
pub fn stripe_mask_spectrum(spec: &StripeMaskSpec, grid: &FreqGrid) -> Result<SpectralWavefunction> {
    let mut amps = vec![Complex64::new(0.0, 0.0); grid.len()];
    for band in &spec.bands {
        let c = spec.alpha * band.offset_mm;
        let half = spec.alpha * band.width_mm / 2.0;
        check_band("stripe pass-band", grid, c - half, c + half)?;
        for (a, w) in amps.iter_mut().zip(rect_cell_weights(grid, c - half, c + half)) {
            *a += w;
        }
    }
    let mut out = SpectralWavefunction::from_parts(*grid, amps);
    for step in &spec.steps {
        out = apply_phase_step(step, &out)?;
    }
    out.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::signal_prep::spectrum_to_temporal;

    const ALPHA: f64 = 2.41;

    fn default_freq() -> FreqGrid {
        TimeGrid::new(4096, 0.01, 0.0).unwrap().conjugate()
    }

    /// Total spectral width and centroid from the sample weights.
    fn width_and_centroid(s: &SpectralWavefunction) -> (f64, f64) {
        let peak = s.peak_magnitude();
        let g = s.grid();
        let weights: Vec<f64> = s.amplitudes().iter().map(|a| a.norm() / peak).collect();
        let total: f64 = weights.iter().sum();
        let centroid = weights.iter().enumerate().map(|(k, w)| w * g.w(k)).sum::<f64>() / total;
        (total * g.dw(), centroid)
    }

    #[test]
    fn slit_width_and_center() {
        let g = default_freq();
        let s = slit_spectrum(&SlitSpec::new(2.0, 0.0, ALPHA).unwrap(), &g).unwrap();
        let (width, centroid) = width_and_centroid(&s);
        assert!((width - 4.82).abs() < 1e-12, "{width}");
        assert!(centroid.abs() < 1e-12);
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);

        let s = slit_spectrum(&SlitSpec::new(2.0, 0.8, ALPHA).unwrap(), &g).unwrap();
        let (width, centroid) = width_and_centroid(&s);
        assert!((width - 4.82).abs() < 1e-12);
        // partial edge cells sit at their cell centers, so the centroid is exact only to O(dw²)
        assert!((centroid - 1.928).abs() < 1e-3, "{centroid}");
    }

    #[test]
    fn centered_slit_is_even() {
        let g = default_freq();
        let s = slit_spectrum(&SlitSpec::new(2.0, 0.0, ALPHA).unwrap(), &g).unwrap();
        let c = g.len() / 2;
        for m in 1..c {
            assert_eq!(s.amplitudes()[c + m], s.amplitudes()[c - m]);
        }
    }

    #[test]
    fn on_boundary_sample_takes_half() {
        let g = FreqGrid::new(64, 1.0, 0.0).unwrap();
        // width 8 centered at 0: edges exactly on samples ±4.
        let s = slit_spectrum(&SlitSpec::new(8.0, 0.0, 1.0).unwrap(), &g).unwrap();
        let inner = s.amplitudes()[32].re;
        assert!((s.amplitudes()[36].re / inner - 0.5).abs() < 1e-15);
        assert!((s.amplitudes()[28].re / inner - 0.5).abs() < 1e-15);
        assert_eq!(s.amplitudes()[37].re, 0.0);
    }

    #[test]
    fn slit_rejects_coarse_grid() {
        let g = FreqGrid::new(64, 1.0, 0.0).unwrap();
        let err = slit_spectrum(&SlitSpec::new(3.9, 0.0, 1.0).unwrap(), &g).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
        assert!(slit_spectrum(&SlitSpec::new(4.0, 0.0, 1.0).unwrap(), &g).is_ok());
        assert!(slit_spectrum(&SlitSpec::new(4.0, 40.0, 1.0).unwrap(), &g).is_err());
    }

    #[test]
    fn phase_step_identity_and_inverse() {
        let g = default_freq();
        let s = slit_spectrum(&SlitSpec::new(2.0, 0.3, ALPHA).unwrap(), &g).unwrap();
        let zero = apply_phase_step(&PhaseStepSpec::new(0.5, 0.0).unwrap(), &s).unwrap();
        assert_eq!(zero, s);
        let theta = 1.234;
        let fwd = apply_phase_step(&PhaseStepSpec::new(0.5, theta).unwrap(), &s).unwrap();
        let back = apply_phase_step(&PhaseStepSpec::new(0.5, -theta).unwrap(), &fwd).unwrap();
        for ((a, b), c) in s.amplitudes().iter().zip(back.amplitudes()).zip(fwd.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
            assert!((a.norm() - c.norm()).abs() < 1e-15);
        }
        assert!(apply_phase_step(&PhaseStepSpec::new(1e4, 1.0).unwrap(), &s).is_err());
    }

    #[test]
    fn canonical_step_range() {
        assert_eq!(canonical_angle(PI), PI);
        assert_eq!(canonical_angle(-PI), PI);
        assert!((canonical_angle(1.5 * PI) + 0.5 * PI).abs() < 1e-15);
        assert!((canonical_angle(-7.0) - (-7.0 + 2.0 * PI)).abs() < 1e-15);
        assert!((canonical_angle(0.25)).eq(&0.25));
    }

    /// Brute-force inverse transform of a slit whose upper half is sign-flipped.
    #[test]
    fn pi_step_at_center_gives_odd_envelope() {
        let g = FreqGrid::new(512, 4.82 / 31.0, 0.0).unwrap();
        // Rect symmetric about the step boundary dw/2, so the two halves mirror.
        let slit = SlitSpec::new(2.0, g.dw() / 2.0 / ALPHA, ALPHA).unwrap();
        let s = slit_spectrum(&slit, &g).unwrap();
        let stepped = apply_phase_step(&PhaseStepSpec::new(g.dw() / 2.0, PI).unwrap(), &s).unwrap();
        let env = spectrum_to_temporal(&stepped);
        let tg = env.grid();
        let brute: Vec<Complex64> = (0..tg.len())
            .map(|j| {
                stepped
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(k, &a)| a * Complex64::from_polar(1.0, g.w(k) * tg.t(j)))
                    .sum::<Complex64>()
                    * g.dw()
                    / (2.0 * PI).sqrt()
            })
            .collect();
        let peak = env.peak_magnitude();
        for (a, b) in env.amplitudes().iter().zip(&brute) {
            assert!((a - b).norm() < 1e-10 * peak);
        }
        // The unstepped peak sits at t = 0, where the stepped envelope vanishes.
        let plain = spectrum_to_temporal(&s);
        let c = tg.center_index();
        assert_eq!(plain.peak_index(), c);
        assert!(env.amplitudes()[c].norm() < 1e-12 * peak);
        // Odd about t = 0 once the half-sample carrier e^{iωc t} is removed.
        let wc = slit.center();
        for m in 1..200 {
            let up = env.amplitudes()[c + m] * Complex64::from_polar(1.0, -wc * tg.t(c + m));
            let down = env.amplitudes()[c - m] * Complex64::from_polar(1.0, -wc * tg.t(c - m));
            assert!((up + down).norm() < 1e-10 * peak);
        }
    }

    #[test]
    fn stripe_single_band_matches_slit() {
        let g = default_freq();
        let mask = StripeMaskSpec::new(
            ALPHA,
            0.5,
            vec![PassBand {
                offset_mm: 0.3,
                width_mm: 2.0,
            }],
            vec![],
        )
        .unwrap();
        let a = stripe_mask_spectrum(&mask, &g).unwrap();
        let b = slit_spectrum(&SlitSpec::new(2.0, 0.3, ALPHA).unwrap(), &g).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn stripe_rejects_overlap_and_coarse_bands() {
        let g = default_freq();
        let bad = StripeMaskSpec::new(
            ALPHA,
            0.5,
            vec![
                PassBand {
                    offset_mm: 0.0,
                    width_mm: 1.0,
                },
                PassBand {
                    offset_mm: 0.8,
                    width_mm: 1.0,
                },
            ],
            vec![],
        );
        assert!(matches!(bad, Err(Error::OverlappingBands(0, 1))));
        let narrow = StripeMaskSpec::new(
            ALPHA,
            0.5,
            vec![PassBand {
                offset_mm: 0.0,
                width_mm: 0.2,
            }],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            stripe_mask_spectrum(&narrow, &g),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    /// Two equal bands at ±ω_c: |ψ(t)|² ∝ sinc²(Δωt/2)·cos²(ω_c t).
    #[test]
    fn two_band_intensity_matches_analytic() {
        let g = default_freq();
        let (width_mm, center_mm) = (0.5, 1.0);
        let mask = StripeMaskSpec::new(
            ALPHA,
            2.0 * center_mm - width_mm,
            vec![
                PassBand {
                    offset_mm: -center_mm,
                    width_mm,
                },
                PassBand {
                    offset_mm: center_mm,
                    width_mm,
                },
            ],
            vec![],
        )
        .unwrap();
        let env = spectrum_to_temporal(&stripe_mask_spectrum(&mask, &g).unwrap());
        let (dw_band, wc) = (ALPHA * width_mm, ALPHA * center_mm);
        let tg = env.grid();
        let analytic: Vec<f64> = (0..tg.len())
            .map(|j| {
                let t = tg.t(j);
                let x = dw_band * t / 2.0;
                let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
                (sinc * (wc * t).cos()).powi(2)
            })
            .collect();
        let intensity = env.intensity();
        let c = tg.center_index();
        let scale = intensity[c] / analytic[c];
        for j in 0..tg.len() {
            if tg.t(j).abs() <= 10.0 {
                let d = (intensity[j] - scale * analytic[j]).abs() / intensity[c];
                assert!(d < 1e-2, "t={} d={d}", tg.t(j));
            }
        }
    }

    /// A step below every band multiplies the whole spectrum by a global phase.
    #[test]
    fn step_below_all_bands_is_global_phase() {
        let g = default_freq();
        let bands = vec![
            PassBand {
                offset_mm: 0.0,
                width_mm: 0.5,
            },
            PassBand {
                offset_mm: 1.0,
                width_mm: 0.5,
            },
        ];
        let second = PhaseStepSpec::new(ALPHA * 1.1, 0.0).unwrap();
        let plain = StripeMaskSpec::new(
            ALPHA,
            0.5,
            bands.clone(),
            vec![PhaseStepSpec::new(-1.0, 0.0).unwrap(), second],
        )
        .unwrap();
        let flipped =
            StripeMaskSpec::new(ALPHA, 0.5, bands, vec![PhaseStepSpec::new(-1.0, PI).unwrap(), second]).unwrap();
        let a = spectrum_to_temporal(&stripe_mask_spectrum(&plain, &g).unwrap());
        let b = spectrum_to_temporal(&stripe_mask_spectrum(&flipped, &g).unwrap());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x + y).norm() < 1e-12);
            assert!((x.norm_sqr() - y.norm_sqr()).abs() < 1e-12);
        }
    }
}
