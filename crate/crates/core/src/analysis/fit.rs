use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::optimize::nelder_mead;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::math::{sinc, weighted_line_fit};
use crate::signal_prep::TemporalEnvelope;

/// FWHM of `|sinc(2πx/Δt)|` in units of Δt.
const SINC_FWHM_RATIO: f64 = 0.603_354_564_401_611;
const COARSE_POINTS: usize = 50;
const PHASE_FLOOR: f64 = 0.1;
const MIN_PHASE_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    SincMagnitude,
    LinearPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    pub params: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    pub window: (f64, f64),
    pub n_samples: usize,
    pub residual_rms: f64,
    pub converged: bool,
}

impl FitReport {
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn param_stderr(&self, name: &str) -> f64 {
        self.stderr.get(name).copied().unwrap_or(f64::NAN)
    }
}

/// `|sinc(2π(t − t_c)/Δt)|`.
pub fn sinc_model(t: f64, t_c: f64, width: f64) -> f64 {
    sinc(2.0 * PI * (t - t_c) / width).abs()
}

/// Starting point for [`fit_sinc_width`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincInit {
    pub t_c: f64,
    pub width: f64,
}

/// Peak position and a width from the half-maximum crossings around it.
fn initial_guess(t: &[f64], m: &[f64]) -> Result<SincInit> {
    let (ip, &peak) = m
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::TooFewSamples { found: 0, needed: 5 })?;
    let half = peak / 2.0;
    let cross = |range: &mut dyn Iterator<Item = usize>, dir: isize| -> Option<f64> {
        for j in range {
            let k = (j as isize - dir) as usize;
            if m[j] < half {
                let f = (m[k] - half) / (m[k] - m[j]);
                return Some(t[k] + f * (t[j] - t[k]));
            }
        }
        None
    };
    let right = cross(&mut (ip + 1..m.len()), 1);
    let left = cross(&mut (0..ip).rev(), -1);
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (t[ip] - l),
        (None, Some(r)) => 2.0 * (r - t[ip]),
        (None, None) => return Err(Error::Degenerate("no half-maximum crossing around the peak")),
    };
    Ok(SincInit {
        t_c: t[ip],
        width: fwhm / SINC_FWHM_RATIO,
    })
}

/// Sum of squared residuals with the amplitude profiled out, and that amplitude.
fn profiled_sse(t: &[f64], m: &[f64], t_c: f64, width: f64) -> (f64, f64) {
    if !(width > 0.0) {
        return (f64::INFINITY, 0.0);
    }
    let s: Vec<f64> = t.iter().map(|&x| sinc_model(x, t_c, width)).collect();
    let ss: f64 = s.iter().map(|v| v * v).sum();
    if ss == 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let a = s.iter().zip(m).map(|(x, y)| x * y).sum::<f64>() / ss;
    let sse = s.iter().zip(m).map(|(x, y)| (a * x - y).powi(2)).sum();
    (sse, a)
}

/// Least-squares `A|sinc(2π(t−t_c)/Δt)|` over the samples where `valid` is set.
///
/// A 50-point grid over ±50% of the initial width picks the starting width;
/// a simplex search then refines `(t_c, Δt)` with `A` solved linearly.
pub fn fit_sinc_width(
    grid: &TimeGrid,
    magnitude: &[f64],
    valid: Option<&[bool]>,
    init: Option<SincInit>,
) -> Result<FitReport> {
    if magnitude.len() != grid.len() || valid.is_some_and(|v| v.len() != grid.len()) {
        return Err(Error::GridMismatch);
    }
    let (t, m): (Vec<f64>, Vec<f64>) = (0..grid.len())
        .filter(|&j| valid.is_none_or(|v| v[j]))
        .map(|j| (grid.t(j), magnitude[j]))
        .unzip();
    if t.len() < 5 {
        return Err(Error::TooFewSamples {
            found: t.len(),
            needed: 5,
        });
    }
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi - lo > 1e-12 * hi.abs().max(f64::MIN_POSITIVE)) || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("flat or non-finite magnitude"));
    }
    let init = match init {
        Some(i) => i,
        None => initial_guess(&t, &m)?,
    };

    let mut best = (f64::INFINITY, init.width);
    for i in 0..COARSE_POINTS {
        let w = init.width * (0.5 + i as f64 / (COARSE_POINTS - 1) as f64);
        let (sse, _) = profiled_sse(&t, &m, init.t_c, w);
        if sse < best.0 {
            best = (sse, w);
        }
    }
    let w0 = best.1;
    let tol = 1e-12 * w0;
    let min = nelder_mead(
        |x| profiled_sse(&t, &m, x[0], x[1]).0,
        &[init.t_c, w0],
        &[0.02 * w0, 0.02 * w0],
        &[tol, tol],
        20_000,
    );
    let (t_c, width) = (min.x[0], min.x[1]);
    let (sse, a) = profiled_sse(&t, &m, t_c, width);
    let n = t.len();

    let stderr = sinc_stderr(&t, a, t_c, width, sse);
    let params = BTreeMap::from([
        ("A".to_string(), a),
        ("t_c".to_string(), t_c),
        ("delta_t".to_string(), width),
    ]);
    Ok(FitReport {
        model: FitModel::SincMagnitude,
        params,
        stderr,
        window: (t[0], t[n - 1]),
        n_samples: n,
        residual_rms: (sse / n as f64).sqrt(),
        converged: min.converged && sse.is_finite() && width > 0.0,
    })
}

/// Standard errors from the Gauss-Newton covariance `s² (JᵀJ)⁻¹`.
fn sinc_stderr(t: &[f64], a: f64, t_c: f64, width: f64, sse: f64) -> BTreeMap<String, f64> {
    let names = ["A", "t_c", "delta_t"];
    let p = [a, t_c, width];
    let model = |p: &[f64; 3], x: f64| p[0] * sinc_model(x, p[1], p[2]);
    let mut jtj = [[0.0; 3]; 3];
    for &x in t {
        let mut g = [0.0; 3];
        for (i, gi) in g.iter_mut().enumerate() {
            let h = 1e-6 * p[i].abs().max(1e-3);
            let mut up = p;
            let mut dn = p;
            up[i] += h;
            dn[i] -= h;
            *gi = (model(&up, x) - model(&dn, x)) / (2.0 * h);
        }
        for i in 0..3 {
            for k in 0..3 {
                jtj[i][k] += g[i] * g[k];
            }
        }
    }
    let dof = t.len().saturating_sub(3).max(1) as f64;
    let s2 = sse / dof;
    let cov = invert3(&jtj);
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), cov.map_or(f64::NAN, |c| (s2 * c[i][i]).max(0.0).sqrt())))
        .collect()
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c = |r: usize, k: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (k1, k2) = ((k + 1) % 3, (k + 2) % 3);
        m[r1][k1] * m[r2][k2] - m[r1][k2] * m[r2][k1]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = c(k, r) / det;
        }
    }
    Some(inv)
}

/// Sequential unwrapping: each step is shifted by a multiple of 2π so that
/// it lies in (−π, π].
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0_f64;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let d: f64 = p + offset - out[i - 1];
            if d > PI || d <= -PI {
                offset -= 2.0 * PI * ((d - PI) / (2.0 * PI)).ceil();
            }
        }
        out.push(p + offset);
    }
    out
}

/// Slope `κ` of the unwrapped phase over `window`, weighted by `|ψ|²`.
///
/// Samples below 10% of the envelope's peak magnitude are dropped before
/// unwrapping.
pub fn fit_phase_gradient(env: &TemporalEnvelope, window: (f64, f64)) -> Result<FitReport> {
    let g = env.grid();
    if !(window.0 < window.1) || window.0 < g.t_min() - 1e-9 || window.1 > g.t_max() + 1e-9 {
        return Err(Error::OutsideGrid {
            what: "phase-fit window",
            value: if window.0 < g.t_min() { window.0 } else { window.1 },
            lo: g.t_min(),
            hi: g.t_max(),
        });
    }
    let floor = PHASE_FLOOR * env.peak_magnitude();
    let (mut t, mut ph, mut w) = (vec![], vec![], vec![]);
    for (j, a) in env.amplitudes().iter().enumerate() {
        let tj = g.t(j);
        if tj >= window.0 - 1e-9 && tj <= window.1 + 1e-9 && a.norm() >= floor && a.norm() > 0.0 {
            t.push(tj);
            ph.push(a.arg());
            w.push(a.norm_sqr());
        }
    }
    if t.len() < MIN_PHASE_SAMPLES {
        return Err(Error::TooFewSamples {
            found: t.len(),
            needed: MIN_PHASE_SAMPLES,
        });
    }
    let ph = unwrap_phase(&ph);
    let (slope, intercept, se) =
        weighted_line_fit(&t, &ph, &w).ok_or(Error::Degenerate("phase samples share one time"))?;
    let sw: f64 = w.iter().sum();
    let rss: f64 = t
        .iter()
        .zip(&ph)
        .zip(&w)
        .map(|((x, y), wi)| wi * (y - slope * x - intercept).powi(2))
        .sum();
    Ok(FitReport {
        model: FitModel::LinearPhase,
        params: BTreeMap::from([("kappa".to_string(), slope), ("intercept".to_string(), intercept)]),
        stderr: BTreeMap::from([("kappa".to_string(), se)]),
        window,
        n_samples: t.len(),
        residual_rms: (rss / sw).sqrt(),
        converged: true,
    })
}
