use serde::{Deserialize, Serialize};

use super::projection::ProjectionDistribution;
use crate::error::{Error, Result};

/// Gaussian kernels are truncated this many standard deviations out.
const TRUNCATION_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateShape {
    #[default]
    Gaussian,
    Delta,
}

/// Time-gate window. `fwhm` is ignored for [`GateShape::Delta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub shape: GateShape,
    pub fwhm: f64,
}

impl GateSpec {
    pub fn gaussian(fwhm: f64) -> Result<Self> {
        if !(fwhm.is_finite() && fwhm > 0.0) {
            return Err(Error::param("gate fwhm", format!("must be positive, got {fwhm}")));
        }
        Ok(GateSpec {
            shape: GateShape::Gaussian,
            fwhm,
        })
    }

    pub fn delta() -> Self {
        GateSpec {
            shape: GateShape::Delta,
            fwhm: 0.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
    }

    /// Discrete kernel on step `dt`, indexed from `-half` to `half`, summing to one.
    pub fn kernel(&self, dt: f64, max_half: usize) -> Vec<f64> {
        match self.shape {
            GateShape::Delta => vec![1.0],
            GateShape::Gaussian => {
                let sigma = self.sigma();
                let half = ((TRUNCATION_SIGMAS * sigma / dt).ceil() as usize).min(max_half);
                let mut w: Vec<f64> = (0..=2 * half)
                    .map(|i| {
                        let x = (i as f64 - half as f64) * dt / sigma;
                        (-0.5 * x * x).exp()
                    })
                    .collect();
                let s: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= s);
                w
            }
        }
    }
}

/// Circular convolution of the distribution with the unit-sum gate kernel.
///
/// Done directly rather than by FFT so non-negative inputs stay non-negative.
pub fn gate_convolve(p: &ProjectionDistribution, gate: &GateSpec) -> Result<ProjectionDistribution> {
    if gate.shape == GateShape::Delta {
        return Ok(p.clone());
    }
    let grid = *p.grid();
    let span = grid.span();
    if gate.fwhm >= span / 4.0 {
        return Err(Error::GateTooWide { fwhm: gate.fwhm, span });
    }
    let n = grid.len();
    let kernel = gate.kernel(grid.dt(), (n - 1) / 2);
    let half = kernel.len() / 2;
    let src = p.values();
    let out = (0..n)
        .map(|j| {
            kernel
                .iter()
                .enumerate()
                .map(|(i, w)| w * src[(j + n + i - half) % n])
                .sum()
        })
        .collect();
    Ok(ProjectionDistribution::from_parts(grid, p.pol(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::{filtered_reference, projection_set, FilterSpec, Polarization};
    use crate::grid::TimeGrid;
    use crate::signal_prep::{slit_spectrum, spectrum_to_temporal, SlitSpec};

    fn slit_d() -> ProjectionDistribution {
        let fg = TimeGrid::new(4096, 0.01, 0.0).unwrap().conjugate();
        let spec = slit_spectrum(&SlitSpec::new(2.0, 0.0, 2.41).unwrap(), &fg).unwrap();
        let r = filtered_reference(&spec, &FilterSpec::new(1.08, 0.0).unwrap()).unwrap();
        projection_set(&spectrum_to_temporal(&spec), &r).unwrap().d
    }

    fn sup_dist(a: &ProjectionDistribution, b: &ProjectionDistribution) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn delta_is_identity() {
        let p = slit_d();
        assert_eq!(gate_convolve(&p, &GateSpec::delta()).unwrap(), p);
    }

    #[test]
    fn default_gate_barely_changes_slit() {
        let p = slit_d();
        let q = gate_convolve(&p, &GateSpec::gaussian(0.0792).unwrap()).unwrap();
        let peak = p.values().iter().cloned().fold(0.0, f64::max);
        assert!(sup_dist(&p, &q) < 0.01 * peak);
        assert!((p.mass() - q.mass()).abs() < 1e-12);
        assert!(q.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn narrowing_gate_converges() {
        let p = slit_d();
        let d: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|&f| sup_dist(&p, &gate_convolve(&p, &GateSpec::gaussian(f).unwrap()).unwrap()))
            .collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }

    #[test]
    fn wide_gate_rejected() {
        let g = TimeGrid::new(64, 0.1, 0.0).unwrap();
        let p = ProjectionDistribution::new(g, Polarization::D, vec![1.0; 64]).unwrap();
        assert!(matches!(
            gate_convolve(&p, &GateSpec::gaussian(1.6).unwrap()),
            Err(Error::GateTooWide { .. })
        ));
        assert!(GateSpec::gaussian(0.0).is_err());
    }

    #[test]
    fn kernel_has_unit_sum_and_fwhm() {
        let g = GateSpec::gaussian(0.0792).unwrap();
        let k = g.kernel(0.0004, 10_000);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mid = k.len() / 2;
        let half_idx = (0.0396f64 / 0.0004).round() as usize;
        assert!((k[mid + half_idx] / k[mid] - 0.5).abs() < 1e-9);
    }
}
