//! Continuous-convention Fourier pair on centered uniform grids.
//!
//! ```text
//! ψ(t)  = (2π)^{-1/2} ∫ ψ̃(ω) e^{+iωt} dω
//! ψ̃(ω) = (2π)^{-1/2} ∫ ψ(t)  e^{-iωt} dt
//! ```
//!
//! Both integrals are evaluated as Riemann sums over the sample lattices,
//! which makes the pair an exact inverse (and exactly Parseval-consistent)
//! whenever `dt * dw = 2π / n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{SpectralWavefunction, TemporalEnvelope};
use crate::grid::{FreqGrid, TimeGrid};

/// `e^{2πi m / n}` with the numerator reduced modulo `n` before scaling.
fn unit_root(m: i128, n: usize) -> Complex64 {
    let r = m.rem_euclid(n as i128) as f64 / n as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// `out_j = Σ_k a_k e^{±2πi (k-c)(j-c)/n}` with `c = n/2`.
fn centered_dft(a: &[Complex64], inverse_sign: bool) -> Vec<Complex64> {
    let n = a.len();
    let c = (n / 2) as i128;
    let s: i128 = if inverse_sign { 1 } else { -1 };
    let mut buf: Vec<Complex64> = a
        .iter()
        .enumerate()
        .map(|(k, &v)| v * unit_root(-s * c * k as i128, n))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = if inverse_sign {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(&mut buf);
    let global = unit_root(s * c * c, n);
    buf.iter_mut()
        .enumerate()
        .for_each(|(j, v)| *v *= global * unit_root(-s * c * j as i128, n));
    buf
}

/// Temporal envelope of a spectrum, on the conjugate grid centered at `t = 0`.
pub fn spectrum_to_temporal(spectrum: &SpectralWavefunction) -> TemporalEnvelope {
    spectrum_to_temporal_at(spectrum, 0.0)
}

/// As [`spectrum_to_temporal`], with the time grid centered on `t_center`.
pub fn spectrum_to_temporal_at(spectrum: &SpectralWavefunction, t_center: f64) -> TemporalEnvelope {
    let fg = spectrum.grid();
    let tg = fg.conjugate(t_center);
    let n = fg.len();
    let c = (n / 2) as f64;
    let a: Vec<Complex64> = spectrum
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, &v)| v * Complex64::from_polar(1.0, (k as f64 - c) * fg.dw() * t_center))
        .collect();
    let b = centered_dft(&a, true);
    let scale = fg.dw() / (2.0 * PI).sqrt();
    let amps = b
        .into_iter()
        .enumerate()
        .map(|(j, v)| v * scale * Complex64::from_polar(1.0, fg.w_center() * tg.t(j)))
        .collect();
    TemporalEnvelope::from_parts(tg, amps)
}

/// Spectrum of a temporal envelope, on the conjugate grid centered at the carrier.
pub fn temporal_to_spectrum(envelope: &TemporalEnvelope) -> SpectralWavefunction {
    temporal_to_spectrum_at(envelope, 0.0)
}

/// As [`temporal_to_spectrum`], with the frequency grid offset by `w_center`.
pub fn temporal_to_spectrum_at(envelope: &TemporalEnvelope, w_center: f64) -> SpectralWavefunction {
    let tg = envelope.grid();
    let mut fg = tg.conjugate();
    if w_center != 0.0 {
        fg = FreqGrid::new(fg.len(), fg.dw(), w_center).expect("conjugate grid is valid");
    }
    let n = tg.len();
    let c = (n / 2) as f64;
    let a: Vec<Complex64> = envelope
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(j, &v)| v * Complex64::from_polar(1.0, -w_center * tg.t(j)))
        .collect();
    let b = centered_dft(&a, false);
    let scale = tg.dt() / (2.0 * PI).sqrt();
    let t_center = tg.t_center();
    let amps = b
        .into_iter()
        .enumerate()
        .map(|(k, v)| v * scale * Complex64::from_polar(1.0, -(k as f64 - c) * fg.dw() * t_center))
        .collect();
    SpectralWavefunction::from_parts(fg, amps)
}

/// Zero-pads (or crops) an envelope symmetrically onto a grid of `n` samples
/// with the same spacing and center.
pub fn embed(envelope: &TemporalEnvelope, n: usize) -> TemporalEnvelope {
    let src = envelope.grid();
    let dst = TimeGrid::measurement(n, src.dt(), src.t_center()).expect("same spacing and center");
    let offset = (n / 2) as isize - (src.len() / 2) as isize;
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for (j, &v) in envelope.amplitudes().iter().enumerate() {
        let k = j as isize + offset;
        if k >= 0 && (k as usize) < n {
            amps[k as usize] = v;
        }
    }
    TemporalEnvelope::from_parts(dst, amps)
}
