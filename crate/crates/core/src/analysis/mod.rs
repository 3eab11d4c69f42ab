//! Sinc-width and phase-gradient fits, classical fidelity and the
//! dynamic-range figure of merit.

mod fidelity;
mod fit;
mod optimize;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use fidelity::{classical_fidelity, rebinned_fidelity, Binned, Domain, FidelityReport};
pub use fit::{fit_phase_gradient, fit_sinc_width, sinc_model, unwrap_phase, FitModel, FitReport, SincInit};
pub use optimize::{nelder_mead, Minimum};

use crate::apparatus::{FilterSpec, GateShape, GateSpec};
use crate::error::{Error, Result};
use crate::math::weighted_line_fit;

/// Measurable window `4π/δω` over the gate FWHM.
pub fn dynamic_range(filter: &FilterSpec, gate: &GateSpec) -> Result<f64> {
    match gate.shape {
        GateShape::Delta => Err(Error::DeltaGate),
        GateShape::Gaussian => Ok(filter.window_width() / gate.fwhm),
    }
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub estimate: f64,
    pub stderr: f64,
}

pub fn write_sweep(points: &[SweepPoint]) -> String {
    let mut s = String::from("param,estimate,stderr\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.param, p.estimate, p.stderr);
    }
    s
}

/// Straight-line law fitted through sweep estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearLaw {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Unweighted regression of estimate against parameter, e.g. `κ = α s + κ₀`.
pub fn fit_linear_law(points: &[SweepPoint]) -> Result<LinearLaw> {
    let x: Vec<f64> = points.iter().map(|p| p.param).collect();
    let y: Vec<f64> = points.iter().map(|p| p.estimate).collect();
    let (slope, intercept, slope_stderr) = weighted_line_fit(&x, &y, &vec![1.0; x.len()])
        .ok_or(Error::Degenerate("sweep needs two distinct parameters"))?;
    Ok(LinearLaw {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Subtracts the estimate at parameter zero from every point, the convention
/// for removing an instrument offset such as κ₀.
pub fn subtract_offset_at_zero(points: &[SweepPoint]) -> Result<Vec<SweepPoint>> {
    let zero = points
        .iter()
        .find(|p| p.param == 0.0)
        .ok_or_else(|| Error::param("sweep", "no point at parameter 0"))?
        .estimate;
    Ok(points
        .iter()
        .map(|p| SweepPoint {
            estimate: p.estimate - zero,
            ..*p
        })
        .collect())
}
