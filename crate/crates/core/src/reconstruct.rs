//! Direct read-out of the complex envelope from the four projections:
//! `Re ∝ P_D − P_A`, `Im ∝ P_R − P_L`, followed by removal of the reference
//! sinc, normalization and a global-phase convention.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::apparatus::csv::infer_grid;
use crate::apparatus::{CountRecord, FilterSpec, PolarizationSet, ProjectionDistribution};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::signal_prep::{embed, temporal_to_spectrum, SpectralWavefunction, TemporalEnvelope};

pub const DEFAULT_SINC_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Probability,
    Counts,
}

/// Unnormalized `re + i·im` with optional standard errors (zero for
/// probability input).
#[derive(Debug, Clone, PartialEq)]
pub struct RawReconstruction {
    pub grid: TimeGrid,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub sigma_re: Vec<f64>,
    pub sigma_im: Vec<f64>,
    pub source: Source,
}

fn check_same_grid<'a>(mut grids: impl Iterator<Item = &'a TimeGrid>) -> Result<TimeGrid> {
    let first = *grids.next().expect("four polarizations");
    if grids.all(|g| g.matches(&first)) {
        Ok(first)
    } else {
        Err(Error::GridMismatch)
    }
}

/// `re = P_D − P_A`, `im = P_R − P_L`.
pub fn raw_from_probabilities(p: &PolarizationSet<ProjectionDistribution>) -> Result<RawReconstruction> {
    let grid = check_same_grid(p.iter().map(|(_, d)| d.grid()))?;
    let diff = |a: &ProjectionDistribution, b: &ProjectionDistribution| -> Vec<f64> {
        a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect()
    };
    Ok(RawReconstruction {
        grid,
        re: diff(&p.d, &p.a),
        im: diff(&p.r, &p.l),
        sigma_re: vec![0.0; grid.len()],
        sigma_im: vec![0.0; grid.len()],
        source: Source::Probability,
    })
}

/// Counts are turned into density estimates `c / (exposure · mean · eff · dt)`;
/// Poisson errors give `σ_re = √(c_D + c_A)` on the same scale.
pub fn raw_from_counts(c: &PolarizationSet<CountRecord>) -> Result<RawReconstruction> {
    let grid = check_same_grid(c.iter().map(|(_, r)| &r.grid))?;
    if c.iter().any(|(_, r)| !r.same_exposure(&c.d)) {
        return Err(Error::Data("count records carry different exposure metadata".into()));
    }
    let scale = c.d.scale();
    if !(scale > 0.0) {
        return Err(Error::Data("count records have zero exposure".into()));
    }
    let pair = |a: &CountRecord, b: &CountRecord| -> (Vec<f64>, Vec<f64>) {
        a.counts
            .iter()
            .zip(&b.counts)
            .map(|(&x, &y)| ((x as f64 - y as f64) / scale, ((x + y) as f64).sqrt() / scale))
            .unzip()
    };
    let (re, sigma_re) = pair(&c.d, &c.a);
    let (im, sigma_im) = pair(&c.r, &c.l);
    Ok(RawReconstruction {
        grid,
        re,
        im,
        sigma_re,
        sigma_im,
        source: Source::Counts,
    })
}

/// Positions where the reference sinc is large enough to divide by.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionMask {
    pub grid: TimeGrid,
    pub sinc_values: Vec<f64>,
    pub valid: Vec<bool>,
    pub threshold: f64,
}

impl CorrectionMask {
    pub fn new(grid: TimeGrid, filter: &FilterSpec, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::param(
                "sinc_threshold",
                format!("must lie in (0, 1), got {threshold}"),
            ));
        }
        let sinc_values: Vec<f64> = grid.times().iter().map(|&t| filter.sinc_at(t)).collect();
        let valid = sinc_values.iter().map(|s| s.abs() >= threshold).collect();
        Ok(CorrectionMask {
            grid,
            sinc_values,
            valid,
            threshold,
        })
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn masked_fraction(&self) -> f64 {
        1.0 - self.valid_count() as f64 / self.valid.len() as f64
    }
}

/// Envelope estimate with per-point standard errors of its real and
/// imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeEstimate {
    pub envelope: TemporalEnvelope,
    pub sigma_re: Vec<f64>,
    pub sigma_im: Vec<f64>,
}

/// Errors of `(re, im)` after multiplying the value by `e^{iθ}`.
fn rotate_sigma(sr: f64, si: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (
        (c * c * sr * sr + s * s * si * si).sqrt(),
        (s * s * sr * sr + c * c * si * si).sqrt(),
    )
}

/// Divides by `sinc(δω t/2) e^{-i·center·t}` where `|sinc| ≥ threshold`;
/// other points are zeroed and flagged in the mask.
pub fn sinc_correction(
    raw: &RawReconstruction,
    filter: &FilterSpec,
    threshold: f64,
) -> Result<(EnvelopeEstimate, CorrectionMask)> {
    let mask = CorrectionMask::new(raw.grid, filter, threshold)?;
    let n = raw.grid.len();
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma_re = vec![0.0; n];
    let mut sigma_im = vec![0.0; n];
    for j in 0..n {
        if !mask.valid[j] {
            continue;
        }
        let s = mask.sinc_values[j];
        let theta = filter.center * raw.grid.t(j);
        amps[j] = Complex64::new(raw.re[j], raw.im[j]) * Complex64::from_polar(1.0 / s, theta);
        let (a, b) = rotate_sigma(raw.sigma_re[j], raw.sigma_im[j], theta);
        sigma_re[j] = a / s.abs();
        sigma_im[j] = b / s.abs();
    }
    let envelope = TemporalEnvelope::from_parts(raw.grid, amps);
    Ok((
        EnvelopeEstimate {
            envelope,
            sigma_re,
            sigma_im,
        },
        mask,
    ))
}

/// Scale factor and phase applied by [`normalize_and_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// Multiplier applied to the magnitudes.
    pub scale: f64,
    /// Phase added to every sample (rad).
    pub rotation: f64,
}

/// Scales so `Σ_valid |ψ|² dt = 1` and rotates the largest valid sample onto
/// the positive real axis.
pub fn normalize_and_phase(est: &EnvelopeEstimate, mask: &CorrectionMask) -> Result<(EnvelopeEstimate, Normalization)> {
    let env = &est.envelope;
    if !env.grid().matches(&mask.grid) {
        return Err(Error::GridMismatch);
    }
    let valid = |j: &usize| mask.valid[*j];
    let mass: f64 = (0..env.len())
        .filter(valid)
        .map(|j| env.amplitudes()[j].norm_sqr())
        .sum::<f64>()
        * env.grid().dt();
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let mut peak = None::<usize>;
    for j in (0..env.len()).filter(valid) {
        if peak.is_none_or(|p| env.amplitudes()[j].norm() > env.amplitudes()[p].norm()) {
            peak = Some(j);
        }
    }
    let rotation = -env.amplitudes()[peak.expect("mass > 0 implies a valid sample")].arg();
    let scale = mass.sqrt().recip();
    let factor = Complex64::from_polar(scale, rotation);
    let envelope = TemporalEnvelope::from_parts(
        *env.grid(),
        env.amplitudes()
            .iter()
            .enumerate()
            .map(|(j, &a)| {
                if mask.valid[j] {
                    a * factor
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    );
    let (sigma_re, sigma_im) = est
        .sigma_re
        .iter()
        .zip(&est.sigma_im)
        .map(|(&a, &b)| {
            let (x, y) = rotate_sigma(a, b, rotation);
            (x * scale, y * scale)
        })
        .unzip();
    Ok((
        EnvelopeEstimate {
            envelope,
            sigma_re,
            sigma_im,
        },
        Normalization { scale, rotation },
    ))
}

/// Spectrum of a reconstructed envelope after zeroing masked points.
/// `n_fft = 0` transforms the measured points as they are; a larger value
/// zero-pads to that length first, which refines the frequency spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedSpectrum {
    pub spectrum: SpectralWavefunction,
    /// Fraction of the measured points that were zero-filled.
    pub zero_filled_fraction: f64,
}

pub fn reconstruction_to_spectrum(
    env: &TemporalEnvelope,
    mask: &CorrectionMask,
    n_fft: usize,
) -> Result<ReconstructedSpectrum> {
    if !env.grid().matches(&mask.grid) {
        return Err(Error::GridMismatch);
    }
    let n_fft = if n_fft == 0 { env.len() } else { n_fft };
    if n_fft < env.len() {
        return Err(Error::param(
            "n_fft",
            format!("{n_fft} is shorter than the {} measured points", env.len()),
        ));
    }
    let filled = TemporalEnvelope::from_parts(
        *env.grid(),
        env.amplitudes()
            .iter()
            .zip(&mask.valid)
            .map(|(&a, &v)| if v { a } else { Complex64::new(0.0, 0.0) })
            .collect(),
    );
    Ok(ReconstructedSpectrum {
        spectrum: temporal_to_spectrum(&embed(&filled, n_fft)),
        zero_filled_fraction: mask.masked_fraction(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    pub filter: FilterSpec,
    pub threshold: f64,
    /// Transform length for the spectrum; 0 means the number of measured points.
    pub n_fft: usize,
}

/// Record of what the reconstruction did, for the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub source: Source,
    pub normalization_constant: f64,
    pub phase_rotation_rad: f64,
    pub sinc_threshold: f64,
    pub valid_points: usize,
    pub masked_fraction: f64,
    pub n_fft: usize,
    pub zero_filled_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub estimate: EnvelopeEstimate,
    pub mask: CorrectionMask,
    pub spectrum: ReconstructedSpectrum,
    pub summary: ReconstructionSummary,
}

impl Reconstruction {
    pub fn envelope(&self) -> &TemporalEnvelope {
        &self.estimate.envelope
    }
}

/// Sinc correction, normalization and spectral transform in one call.
pub fn reconstruct(raw: &RawReconstruction, opts: &ReconstructionOptions) -> Result<Reconstruction> {
    let (corrected, mask) = sinc_correction(raw, &opts.filter, opts.threshold)?;
    let (estimate, norm) = normalize_and_phase(&corrected, &mask)?;
    let spectrum = reconstruction_to_spectrum(&estimate.envelope, &mask, opts.n_fft)?;
    let summary = ReconstructionSummary {
        source: raw.source,
        normalization_constant: norm.scale,
        phase_rotation_rad: norm.rotation,
        sinc_threshold: opts.threshold,
        valid_points: mask.valid_count(),
        masked_fraction: mask.masked_fraction(),
        n_fft: spectrum.spectrum.len(),
        zero_filled_fraction: spectrum.zero_filled_fraction,
    };
    Ok(Reconstruction {
        estimate,
        mask,
        spectrum,
        summary,
    })
}

pub const RECONSTRUCTION_COLUMNS: &str = "t_ps,re,im,sigma_re,sigma_im,valid";
pub const SPECTRUM_COLUMNS: &str = "w_radps,re,im";

pub fn write_reconstruction(est: &EnvelopeEstimate, mask: &CorrectionMask) -> String {
    let mut s = format!("{RECONSTRUCTION_COLUMNS}\n");
    let g = est.envelope.grid();
    for (j, a) in est.envelope.amplitudes().iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            g.t(j),
            a.re,
            a.im,
            est.sigma_re[j],
            est.sigma_im[j],
            u8::from(mask.valid[j])
        );
    }
    s
}

pub fn write_spectrum(spec: &SpectralWavefunction) -> String {
    let mut s = format!("{SPECTRUM_COLUMNS}\n");
    let g = spec.grid();
    for (k, a) in spec.amplitudes().iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", g.w(k), a.re, a.im);
    }
    s
}

/// Reads a reconstruction table back as an estimate plus validity flags.
pub fn parse_reconstruction(text: &str) -> Result<(EnvelopeEstimate, Vec<bool>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == RECONSTRUCTION_COLUMNS => {}
        other => {
            return Err(Error::Data(format!(
                "expected header `{RECONSTRUCTION_COLUMNS}`, found {other:?}"
            )))
        }
    }
    let (mut t, mut amps, mut sr, mut si, mut valid) = (vec![], vec![], vec![], vec![], vec![]);
    for line in lines {
        let cols: Vec<&str> = line.trim().split(',').collect();
        let bad = || Error::Data(format!("malformed row `{line}`"));
        if cols.len() != 6 {
            return Err(bad());
        }
        let f = |i: usize| cols[i].trim().parse::<f64>().map_err(|_| bad());
        t.push(f(0)?);
        amps.push(Complex64::new(f(1)?, f(2)?));
        sr.push(f(3)?);
        si.push(f(4)?);
        valid.push(match cols[5].trim() {
            "1" => true,
            "0" => false,
            _ => return Err(bad()),
        });
    }
    let grid = infer_grid(&t)?;
    Ok((
        EnvelopeEstimate {
            envelope: TemporalEnvelope::new(grid, amps)?,
            sigma_re: sr,
            sigma_im: si,
        },
        valid,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{run_experiment, DelayScan, ExperimentConfig, GateSpec, Noise, Polarization, ReferenceMode};
    use crate::signal_prep::{SlitSpec, StateSpec};

    fn slit_cfg(s_mm: f64) -> ExperimentConfig {
        ExperimentConfig {
            state: StateSpec::Slit(SlitSpec::new(2.0, s_mm, 2.41).unwrap()),
            grid: TimeGrid::new(4096, 0.01, 0.0).unwrap(),
            filter: FilterSpec::new(1.08, 0.0).unwrap(),
            reference_mode: ReferenceMode::Exact,
            gate: GateSpec::gaussian(0.0792).unwrap(),
            scan: DelayScan::default(),
            noise: Noise::Noiseless,
            seed: 0,
        }
    }

    fn opts() -> ReconstructionOptions {
        ReconstructionOptions {
            filter: FilterSpec::new(1.08, 0.0).unwrap(),
            threshold: DEFAULT_SINC_THRESHOLD,
            n_fft: 0,
        }
    }

    #[test]
    fn equal_inputs_give_zero() {
        let g = TimeGrid::measurement(11, 0.1, 0.0).unwrap();
        let p = ProjectionDistribution::new(g, Polarization::D, vec![0.3; 11]).unwrap();
        let set = PolarizationSet::from_fn(|_| p.clone());
        let raw = raw_from_probabilities(&set).unwrap();
        assert!(raw.re.iter().chain(&raw.im).all(|&v| v == 0.0));
    }

    #[test]
    fn slit_raw_is_real() {
        let out = run_experiment(&slit_cfg(0.0)).unwrap();
        let raw = raw_from_probabilities(&out.probabilities).unwrap();
        let peak = raw.re.iter().cloned().fold(0.0, f64::max);
        assert!(raw.im.iter().all(|v| v.abs() < 1e-12 * peak));
    }

    #[test]
    fn mask_edge_location() {
        let m = CorrectionMask::new(TimeGrid::measurement(585, 0.02, 0.0).unwrap(), &opts().filter, 0.05).unwrap();
        let last_valid = (0..585).rev().find(|&j| m.valid[j]).unwrap();
        let t = m.grid.t(last_valid);
        assert!((5.52..=5.56).contains(&t), "{t}");
        assert!(CorrectionMask::new(m.grid, &opts().filter, 1.0).is_err());
    }

    #[test]
    fn slit_pipeline_matches_truth() {
        let out = run_experiment(&slit_cfg(0.0)).unwrap();
        let rec = reconstruct(&raw_from_probabilities(&out.probabilities).unwrap(), &opts()).unwrap();
        let truth = out.truth_on_scan.normalized().unwrap();
        let mass: f64 = (0..truth.len())
            .filter(|&j| rec.mask.valid[j])
            .map(|j| truth.amplitudes()[j].norm_sqr())
            .sum::<f64>()
            * truth.grid().dt();
        let truth = truth.scaled(Complex64::new(mass.sqrt().recip(), 0.0));
        let peak = truth.peak_magnitude();
        let mut worst = 0.0f64;
        for j in (0..truth.len()).filter(|&j| rec.mask.valid[j]) {
            worst = worst.max((rec.envelope().amplitudes()[j] - truth.amplitudes()[j]).norm() / peak);
        }
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn gauge_invariance() {
        let out = run_experiment(&slit_cfg(0.6)).unwrap();
        let a = reconstruct(&raw_from_probabilities(&out.probabilities).unwrap(), &opts()).unwrap();
        let scaled = out.probabilities.map(|_, d| d.scaled(37.5));
        let b = reconstruct(&raw_from_probabilities(&scaled).unwrap(), &opts()).unwrap();
        for (x, y) in a.envelope().amplitudes().iter().zip(b.envelope().amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn normalized_input_is_fixed_point() {
        let out = run_experiment(&slit_cfg(0.0)).unwrap();
        let rec = reconstruct(&raw_from_probabilities(&out.probabilities).unwrap(), &opts()).unwrap();
        let (again, norm) = normalize_and_phase(&rec.estimate, &rec.mask).unwrap();
        assert!((norm.scale - 1.0).abs() < 1e-12 && norm.rotation.abs() < 1e-12);
        for (x, y) in again.envelope.amplitudes().iter().zip(rec.envelope().amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn table_round_trip() {
        let out = run_experiment(&slit_cfg(0.4)).unwrap();
        let rec = reconstruct(&raw_from_probabilities(&out.probabilities).unwrap(), &opts()).unwrap();
        let (est, valid) = parse_reconstruction(&write_reconstruction(&rec.estimate, &rec.mask)).unwrap();
        assert_eq!(valid, rec.mask.valid);
        assert_eq!(est, rec.estimate);
    }
}
