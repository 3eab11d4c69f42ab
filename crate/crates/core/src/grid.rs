//! Uniform sampling grids for the time and angular-frequency domains.
//!
//! Sample `j` of a grid with `n` samples sits at `center + (j - n/2) * step`
//! (integer division), so the center coordinate is always sampled exactly.
//! Times are in picoseconds and angular frequencies in rad/ps, measured
//! relative to the carrier.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid (ps).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
    t_center: f64,
}

/// Uniform angular-frequency grid (rad/ps), offset `w_center` from the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqGrid {
    n_samples: usize,
    dw: f64,
    w_center: f64,
}

fn check_common(n: usize, step: f64, center: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 samples, got {n}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
    }
    if !center.is_finite() {
        return Err(Error::InvalidGrid("center must be finite".into()));
    }
    Ok(())
}

impl TimeGrid {
    /// Simulation grid; the sample count must be a power of two.
    pub fn new(n_samples: usize, dt: f64, t_center: f64) -> Result<Self> {
        if !n_samples.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "simulation grids need a power-of-two sample count, got {n_samples}"
            )));
        }
        Self::measurement(n_samples, dt, t_center)
    }

    /// Grid of measured delay points. Any sample count is allowed; transforms
    /// on such grids go through a zero-padded power-of-two embedding.
    pub fn measurement(n_samples: usize, dt: f64, t_center: f64) -> Result<Self> {
        check_common(n_samples, dt, t_center)?;
        Ok(TimeGrid {
            n_samples,
            dt,
            t_center,
        })
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_center(&self) -> f64 {
        self.t_center
    }

    /// Index of the sample located at `t_center`.
    pub fn center_index(&self) -> usize {
        self.n_samples / 2
    }

    pub fn t(&self, j: usize) -> f64 {
        self.t_center + (j as f64 - (self.n_samples / 2) as f64) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|j| self.t(j)).collect()
    }

    pub fn t_min(&self) -> f64 {
        self.t(0)
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n_samples - 1)
    }

    /// Full periodic span `n * dt`.
    pub fn span(&self) -> f64 {
        self.n_samples as f64 * self.dt
    }

    /// The conjugate frequency grid, `dw = 2π / (n dt)`, centered on the carrier.
    pub fn conjugate(&self) -> FreqGrid {
        FreqGrid {
            n_samples: self.n_samples,
            dw: 2.0 * PI / (self.n_samples as f64 * self.dt),
            w_center: 0.0,
        }
    }

    /// Same spacing and center, `n` samples.
    pub fn resized(&self, n: usize) -> Result<Self> {
        Self::measurement(n, self.dt, self.t_center)
    }

    /// True when the two grids sample identical instants (to 1e-9 relative).
    pub fn matches(&self, other: &TimeGrid) -> bool {
        self.n_samples == other.n_samples
            && close(self.dt, other.dt)
            && (self.t_center - other.t_center).abs() <= 1e-9 * self.dt
    }
}

impl FreqGrid {
    pub fn new(n_samples: usize, dw: f64, w_center: f64) -> Result<Self> {
        check_common(n_samples, dw, w_center)?;
        Ok(FreqGrid {
            n_samples,
            dw,
            w_center,
        })
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn dw(&self) -> f64 {
        self.dw
    }

    pub fn w_center(&self) -> f64 {
        self.w_center
    }

    pub fn w(&self, k: usize) -> f64 {
        self.w_center + (k as f64 - (self.n_samples / 2) as f64) * self.dw
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.w(k)).collect()
    }

    pub fn w_min(&self) -> f64 {
        self.w(0)
    }

    pub fn w_max(&self) -> f64 {
        self.w(self.n_samples - 1)
    }

    /// Index of the sample whose frequency cell `[w - dw/2, w + dw/2)` holds `w`.
    pub fn cell_index(&self, w: f64) -> Option<usize> {
        let k = ((w - self.w_center) / self.dw + 0.5).floor() + (self.n_samples / 2) as f64;
        if k >= 0.0 && (k as usize) < self.n_samples {
            Some(k as usize)
        } else {
            None
        }
    }

    /// Conjugate time grid centered on `t_center`.
    pub fn conjugate(&self, t_center: f64) -> TimeGrid {
        TimeGrid {
            n_samples: self.n_samples,
            dt: 2.0 * PI / (self.n_samples as f64 * self.dw),
            t_center,
        }
    }

    pub fn matches(&self, other: &FreqGrid) -> bool {
        self.n_samples == other.n_samples
            && close(self.dw, other.dw)
            && (self.w_center - other.w_center).abs() <= 1e-9 * self.dw
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_sample_is_exact() {
        let g = TimeGrid::new(4096, 0.01, 0.0).unwrap();
        assert_eq!(g.t(g.center_index()), 0.0);
        assert!((g.t_min() + 20.48).abs() < 1e-12);
        let odd = TimeGrid::measurement(585, 0.02, 0.0).unwrap();
        assert_eq!(odd.t(292), 0.0);
        assert!((odd.t_min() + odd.t_max()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_spacing() {
        let g = TimeGrid::new(4096, 0.01, 0.0).unwrap();
        let f = g.conjugate();
        assert!((f.dw() - 2.0 * PI / 40.96).abs() < 1e-15);
        let back = f.conjugate(0.0);
        assert!(back.matches(&g));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(1000, 0.01, 0.0).is_err());
        assert!(TimeGrid::new(1024, 0.0, 0.0).is_err());
        assert!(TimeGrid::measurement(1, 0.01, 0.0).is_err());
        assert!(FreqGrid::new(64, -1.0, 0.0).is_err());
    }

    #[test]
    fn cell_lookup() {
        let f = FreqGrid::new(8, 1.0, 0.0).unwrap();
        assert_eq!(f.cell_index(0.0), Some(4));
        assert_eq!(f.cell_index(0.49), Some(4));
        assert_eq!(f.cell_index(0.5), Some(5));
        assert_eq!(f.cell_index(-4.0), Some(0));
        assert_eq!(f.cell_index(-4.6), None);
        assert_eq!(f.cell_index(3.6), None);
    }
}
