//! `key = value` run configuration. Every physical constant used by a run
//! lives here, with units in the key names; [`RunConfig::to_text`] writes a
//! complete file that parses back to the same configuration.

use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::apparatus::{DelayScan, ExperimentConfig, FilterSpec, GateShape, GateSpec, Noise, ReferenceMode};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::reconstruct::ReconstructionOptions;
use crate::signal_prep::{PassBand, PhaseStepSpec, SlitSpec, StateSpec, StripeMaskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prep {
    Slit,
    SlitGlass,
    Stripe,
}

impl fmt::Display for Prep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prep::Slit => "slit",
            Prep::SlitGlass => "slit+glass",
            Prep::Stripe => "stripe",
        })
    }
}

impl FromStr for Prep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "slit" => Ok(Prep::Slit),
            "slit+glass" => Ok(Prep::SlitGlass),
            "stripe" => Ok(Prep::Stripe),
            _ => Err(format!("unknown prep `{s}` (slit, slit+glass, stripe)")),
        }
    }
}

/// Photon-number regime. `Cl` is simulated without shot noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseMode {
    Noiseless,
    Cl,
    Spl,
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::Noiseless => "noiseless",
            NoiseMode::Cl => "cl",
            NoiseMode::Spl => "spl",
        })
    }
}

impl FromStr for NoiseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "noiseless" => Ok(NoiseMode::Noiseless),
            "cl" => Ok(NoiseMode::Cl),
            "spl" => Ok(NoiseMode::Spl),
            _ => Err(format!("unknown noise mode `{s}` (noiseless, cl, spl)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub prep: Prep,
    pub w_mm: f64,
    pub s_mm: f64,
    pub alpha_thz_per_mm: f64,
    pub phase_step_rad: f64,
    pub step_boundary_radps: f64,
    pub stripe_gap_mm: f64,
    pub stripe_band_offsets_mm: Vec<f64>,
    pub stripe_band_widths_mm: Vec<f64>,
    pub stripe_step_boundaries_radps: Vec<f64>,
    pub stripe_steps_rad: Vec<f64>,
    pub n: usize,
    pub dt_ps: f64,
    pub filter_width_radps: f64,
    pub filter_center_radps: f64,
    pub reference_mode: ReferenceMode,
    pub gate_shape: GateShape,
    pub gate_fwhm_ps: f64,
    pub noise: NoiseMode,
    pub photons_per_pulse_cl: f64,
    pub photons_per_pulse_spl: f64,
    pub detection_efficiency: f64,
    pub exposure_s: f64,
    pub rep_rate_mhz: f64,
    pub scan_points: usize,
    pub scan_step_ps: f64,
    pub scan_center_ps: f64,
    pub sinc_threshold: f64,
    pub n_fft: usize,
    pub phase_window_half_ps: f64,
    pub seed: u64,
    /// Scenario that produced this configuration, when written as a manifest.
    pub scenario: Option<String>,
    /// Program version recorded in manifests; informational only.
    pub code_version: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let alpha = 2.41;
        RunConfig {
            prep: Prep::Slit,
            w_mm: 2.0,
            s_mm: 0.0,
            alpha_thz_per_mm: alpha,
            phase_step_rad: FRAC_PI_2,
            step_boundary_radps: 1.2,
            stripe_gap_mm: 0.5,
            stripe_band_offsets_mm: vec![0.0, 1.5],
            stripe_band_widths_mm: vec![1.0, 1.0],
            stripe_step_boundaries_radps: vec![alpha * 0.75, alpha * 1.5],
            stripe_steps_rad: vec![FRAC_PI_2, FRAC_PI_2],
            n: 4096,
            dt_ps: 0.01,
            filter_width_radps: 1.08,
            filter_center_radps: 0.0,
            reference_mode: ReferenceMode::Exact,
            gate_shape: GateShape::Gaussian,
            gate_fwhm_ps: 0.0792,
            noise: NoiseMode::Noiseless,
            photons_per_pulse_cl: 366.0,
            photons_per_pulse_spl: 0.58,
            detection_efficiency: 1e-4,
            exposure_s: 25.0,
            rep_rate_mhz: 100.0,
            scan_points: 585,
            scan_step_ps: 0.02,
            scan_center_ps: 0.0,
            sinc_threshold: 0.05,
            n_fft: 0,
            phase_window_half_ps: 1.0,
            seed: 0,
            scenario: None,
            code_version: None,
        }
    }
}

fn list_text(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn parse_scalar<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))
}

impl RunConfig {
    /// Defaults overridden by the `key = value` lines of `text`. Blank lines
    /// and `#` comments are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    /// Applies overrides on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("key `{key}` given twice")));
            }
            self.set(key, value).map_err(err)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "prep" => self.prep = parse_scalar(v)?,
            "w_mm" => self.w_mm = parse_scalar(v)?,
            "s_mm" => self.s_mm = parse_scalar(v)?,
            "alpha_thz_per_mm" => self.alpha_thz_per_mm = parse_scalar(v)?,
            "phase_step_rad" => self.phase_step_rad = parse_scalar(v)?,
            "step_boundary_radps" => self.step_boundary_radps = parse_scalar(v)?,
            "stripe_gap_mm" => self.stripe_gap_mm = parse_scalar(v)?,
            "stripe_band_offsets_mm" => self.stripe_band_offsets_mm = parse_list(v)?,
            "stripe_band_widths_mm" => self.stripe_band_widths_mm = parse_list(v)?,
            "stripe_step_boundaries_radps" => self.stripe_step_boundaries_radps = parse_list(v)?,
            "stripe_steps_rad" => self.stripe_steps_rad = parse_list(v)?,
            "n" => self.n = parse_scalar(v)?,
            "dt_ps" => self.dt_ps = parse_scalar(v)?,
            "filter_width_radps" => self.filter_width_radps = parse_scalar(v)?,
            "filter_center_radps" => self.filter_center_radps = parse_scalar(v)?,
            "reference_mode" => {
                self.reference_mode = match v {
                    "exact" => ReferenceMode::Exact,
                    "constant" => ReferenceMode::ConstantSpectrum,
                    _ => return Err(format!("unknown reference_mode `{v}` (exact, constant)")),
                }
            }
            "gate_shape" => {
                self.gate_shape = match v {
                    "gaussian" => GateShape::Gaussian,
                    "delta" => GateShape::Delta,
                    _ => return Err(format!("unknown gate_shape `{v}` (gaussian, delta)")),
                }
            }
            "gate_fwhm_ps" => self.gate_fwhm_ps = parse_scalar(v)?,
            "noise" => self.noise = parse_scalar(v)?,
            "photons_per_pulse_cl" => self.photons_per_pulse_cl = parse_scalar(v)?,
            "photons_per_pulse_spl" => self.photons_per_pulse_spl = parse_scalar(v)?,
            "detection_efficiency" => self.detection_efficiency = parse_scalar(v)?,
            "exposure_s" => self.exposure_s = parse_scalar(v)?,
            "rep_rate_mhz" => self.rep_rate_mhz = parse_scalar(v)?,
            "scan_points" => self.scan_points = parse_scalar(v)?,
            "scan_step_ps" => self.scan_step_ps = parse_scalar(v)?,
            "scan_center_ps" => self.scan_center_ps = parse_scalar(v)?,
            "sinc_threshold" => self.sinc_threshold = parse_scalar(v)?,
            "n_fft" => self.n_fft = parse_scalar(v)?,
            "phase_window_half_ps" => self.phase_window_half_ps = parse_scalar(v)?,
            "seed" => self.seed = parse_scalar(v)?,
            "scenario" => self.scenario = Some(v.to_string()),
            "code_version" => self.code_version = Some(v.to_string()),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Every key, one per line, in a form [`RunConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("prep", self.prep.to_string());
        kv("w_mm", self.w_mm.to_string());
        kv("s_mm", self.s_mm.to_string());
        kv("alpha_thz_per_mm", self.alpha_thz_per_mm.to_string());
        kv("phase_step_rad", self.phase_step_rad.to_string());
        kv("step_boundary_radps", self.step_boundary_radps.to_string());
        kv("stripe_gap_mm", self.stripe_gap_mm.to_string());
        kv("stripe_band_offsets_mm", list_text(&self.stripe_band_offsets_mm));
        kv("stripe_band_widths_mm", list_text(&self.stripe_band_widths_mm));
        kv(
            "stripe_step_boundaries_radps",
            list_text(&self.stripe_step_boundaries_radps),
        );
        kv("stripe_steps_rad", list_text(&self.stripe_steps_rad));
        kv("n", self.n.to_string());
        kv("dt_ps", self.dt_ps.to_string());
        kv("filter_width_radps", self.filter_width_radps.to_string());
        kv("filter_center_radps", self.filter_center_radps.to_string());
        kv(
            "reference_mode",
            match self.reference_mode {
                ReferenceMode::Exact => "exact",
                ReferenceMode::ConstantSpectrum => "constant",
            }
            .into(),
        );
        kv(
            "gate_shape",
            match self.gate_shape {
                GateShape::Gaussian => "gaussian",
                GateShape::Delta => "delta",
            }
            .into(),
        );
        kv("gate_fwhm_ps", self.gate_fwhm_ps.to_string());
        kv("noise", self.noise.to_string());
        kv("photons_per_pulse_cl", self.photons_per_pulse_cl.to_string());
        kv("photons_per_pulse_spl", self.photons_per_pulse_spl.to_string());
        kv("detection_efficiency", self.detection_efficiency.to_string());
        kv("exposure_s", self.exposure_s.to_string());
        kv("rep_rate_mhz", self.rep_rate_mhz.to_string());
        kv("scan_points", self.scan_points.to_string());
        kv("scan_step_ps", self.scan_step_ps.to_string());
        kv("scan_center_ps", self.scan_center_ps.to_string());
        kv("sinc_threshold", self.sinc_threshold.to_string());
        kv("n_fft", self.n_fft.to_string());
        kv("phase_window_half_ps", self.phase_window_half_ps.to_string());
        kv("seed", self.seed.to_string());
        if let Some(name) = &self.scenario {
            kv("scenario", name.clone());
        }
        if let Some(v) = &self.code_version {
            kv("code_version", v.clone());
        }
        s
    }

    pub fn state(&self) -> Result<StateSpec> {
        let alpha = self.alpha_thz_per_mm;
        Ok(match self.prep {
            Prep::Slit => StateSpec::Slit(SlitSpec::new(self.w_mm, self.s_mm, alpha)?),
            Prep::SlitGlass => StateSpec::SlitWithGlass {
                slit: SlitSpec::new(self.w_mm, self.s_mm, alpha)?,
                glass: PhaseStepSpec::new(self.step_boundary_radps, self.phase_step_rad)?,
            },
            Prep::Stripe => {
                if self.stripe_band_offsets_mm.len() != self.stripe_band_widths_mm.len() {
                    return Err(Error::param("stripe_band_widths_mm", "needs one width per band offset"));
                }
                if self.stripe_step_boundaries_radps.len() != self.stripe_steps_rad.len() {
                    return Err(Error::param("stripe_steps_rad", "needs one step per step boundary"));
                }
                let bands = self
                    .stripe_band_offsets_mm
                    .iter()
                    .zip(&self.stripe_band_widths_mm)
                    .map(|(&offset_mm, &width_mm)| PassBand { offset_mm, width_mm })
                    .collect();
                let steps = self
                    .stripe_step_boundaries_radps
                    .iter()
                    .zip(&self.stripe_steps_rad)
                    .map(|(&b, &s)| PhaseStepSpec::new(b, s))
                    .collect::<Result<_>>()?;
                StateSpec::Stripe(StripeMaskSpec::new(alpha, self.stripe_gap_mm, bands, steps)?)
            }
        })
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.n, self.dt_ps, 0.0)
    }

    pub fn filter(&self) -> Result<FilterSpec> {
        FilterSpec::new(self.filter_width_radps, self.filter_center_radps)
    }

    pub fn gate(&self) -> Result<GateSpec> {
        match self.gate_shape {
            GateShape::Gaussian => GateSpec::gaussian(self.gate_fwhm_ps),
            GateShape::Delta => Ok(GateSpec::delta()),
        }
    }

    pub fn exposure_pulses(&self) -> Result<u64> {
        let p = self.exposure_s * self.rep_rate_mhz * 1e6;
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::param("exposure_s", format!("exposure of {p} pulses")));
        }
        Ok(p.round() as u64)
    }

    pub fn noise_model(&self) -> Result<Noise> {
        Ok(match self.noise {
            NoiseMode::Noiseless | NoiseMode::Cl => Noise::Noiseless,
            NoiseMode::Spl => Noise::Counting {
                exposure_pulses: self.exposure_pulses()?,
                mean_photons_per_pulse: self.photons_per_pulse_spl,
                efficiency: self.detection_efficiency,
            },
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            state: self.state()?,
            grid: self.grid()?,
            filter: self.filter()?,
            reference_mode: self.reference_mode,
            gate: self.gate()?,
            scan: DelayScan {
                n_points: self.scan_points,
                step: self.scan_step_ps,
                center: self.scan_center_ps,
            },
            noise: self.noise_model()?,
            seed: self.seed,
        })
    }

    pub fn reconstruction(&self) -> Result<ReconstructionOptions> {
        Ok(ReconstructionOptions {
            filter: self.filter()?,
            threshold: self.sinc_threshold,
            n_fft: self.n_fft,
        })
    }
}
