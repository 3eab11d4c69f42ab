use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use tempwave::apparatus::csv::{data_file_name, write_counts, write_probabilities};
use tempwave::apparatus::ExperimentOutput;
use tempwave::pipeline::Scores;
use tempwave::reconstruct::{write_reconstruction, write_spectrum, Reconstruction};
use tempwave::{RunConfig, SpectralWavefunction, TemporalEnvelope};

pub use tempwave::apparatus::csv::ingest_counts;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

/// Reads a config file on top of `base`.
pub fn apply_config_file(base: &mut RunConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    base.apply(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(())
}

/// One file per polarization: counts when the run sampled them, densities otherwise.
pub fn write_data(dir: &Path, out: &ExperimentOutput, seed: u64) -> Result<()> {
    match &out.counts {
        Some(c) => {
            for (p, rec) in c.iter() {
                write_text(&dir.join(data_file_name(p)), &write_counts(rec))?;
            }
        }
        None => {
            for (p, d) in out.probabilities.iter() {
                write_text(&dir.join(data_file_name(p)), &write_probabilities(d, seed))?;
            }
        }
    }
    Ok(())
}

pub fn envelope_table(env: &TemporalEnvelope) -> String {
    let mut s = String::from("t_ps,re,im\n");
    for (j, a) in env.amplitudes().iter().enumerate() {
        let _ = writeln!(s, "{},{},{}", env.grid().t(j), a.re, a.im);
    }
    s
}

/// Ground truth on the scan grid and its full spectrum.
pub fn write_truth(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    write_text(&dir.join("truth_time.csv"), &envelope_table(&out.truth_on_scan))?;
    write_text(&dir.join("truth_spectrum.csv"), &write_spectrum(&out.spectrum))
}

pub fn write_reconstruction_files(dir: &Path, rec: &Reconstruction) -> Result<()> {
    write_text(
        &dir.join("reconstruction.csv"),
        &write_reconstruction(&rec.estimate, &rec.mask),
    )?;
    write_text(&dir.join("spectrum.csv"), &write_spectrum(&rec.spectrum.spectrum))?;
    write_json(&dir.join("summary.json"), &rec.summary)
}

pub fn write_scores(dir: &Path, scores: &Scores) -> Result<()> {
    #[derive(Serialize)]
    struct Fits<'a> {
        sinc_fit: &'a Option<tempwave::analysis::FitReport>,
        phase_fit: &'a Option<tempwave::analysis::FitReport>,
    }
    write_json(
        &dir.join("fits.json"),
        &Fits {
            sinc_fit: &scores.sinc_fit,
            phase_fit: &scores.phase_fit,
        },
    )?;
    let mut s = String::from("domain,value,bin_count\n");
    for f in [&scores.time_fidelity, &scores.frequency_fidelity] {
        let domain = match f.domain {
            tempwave::analysis::Domain::Time => "time",
            tempwave::analysis::Domain::Frequency => "frequency",
        };
        let _ = writeln!(s, "{domain},{},{}", f.value, f.bin_count);
    }
    write_text(&dir.join("fidelity.csv"), &s)
}

/// Parses a three-column `x,re,im` table with the given first column name.
pub fn read_complex_table(text: &str, first: &str) -> tempwave::Result<(Vec<f64>, Vec<Complex64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let expected = format!("{first},re,im");
    match lines.next() {
        Some(h) if h.trim() == expected => {}
        other => {
            return Err(tempwave::Error::Data(format!(
                "expected header `{expected}`, found {other:?}"
            )))
        }
    }
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    for line in lines {
        let bad = || tempwave::Error::Data(format!("malformed row `{line}`"));
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<tempwave::Result<_>>()?;
        if cols.len() != 3 {
            return Err(bad());
        }
        xs.push(cols[0]);
        zs.push(Complex64::new(cols[1], cols[2]));
    }
    Ok((xs, zs))
}

/// Spectrum table back onto a frequency grid.
pub fn read_spectrum(text: &str) -> tempwave::Result<SpectralWavefunction> {
    let (w, z) = read_complex_table(text, "w_radps")?;
    if w.len() < 2 {
        return Err(tempwave::Error::Data("spectrum needs at least two rows".into()));
    }
    let dw = (w[w.len() - 1] - w[0]) / (w.len() - 1) as f64;
    let center = w[w.len() / 2];
    let grid = tempwave::FreqGrid::new(w.len(), dw, center).map_err(|e| tempwave::Error::Data(e.to_string()))?;
    for (k, &x) in w.iter().enumerate() {
        if (x - grid.w(k)).abs() > 1e-6 * dw {
            return Err(tempwave::Error::Data(format!("non-uniform frequency grid at row {k}")));
        }
    }
    SpectralWavefunction::new(grid, z)
}

/// Time-domain table back onto a measurement grid.
pub fn read_envelope(text: &str) -> tempwave::Result<TemporalEnvelope> {
    let (t, z) = read_complex_table(text, "t_ps")?;
    let grid = tempwave::apparatus::csv::infer_grid(&t)?;
    TemporalEnvelope::new(grid, z)
}
