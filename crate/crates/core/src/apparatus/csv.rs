//! Per-polarization data files: a `#` metadata line, a column header, then
//! `t_ps,value` rows. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use super::counting::CountRecord;
use super::projection::{Polarization, PolarizationSet, ProjectionDistribution};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Metadata carried by the first line of a data file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataHeader {
    pub pol: Polarization,
    pub exposure_pulses: u64,
    pub mean_photons: f64,
    pub efficiency: f64,
    pub seed: u64,
}

impl DataHeader {
    fn line(&self) -> String {
        format!(
            "# pol={} exposure_pulses={} mean_photons={} efficiency={} seed={}",
            self.pol, self.exposure_pulses, self.mean_photons, self.efficiency, self.seed
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix('#')
            .ok_or_else(|| Error::Data(format!("missing `#` header line, found `{line}`")))?;
        let mut pol = None;
        let mut exposure = None;
        let mut mean = None;
        let mut eff = None;
        let mut seed = None;
        for field in body.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Data(format!("malformed header field `{field}`")))?;
            let bad = |_| Error::Data(format!("malformed header value `{field}`"));
            match k {
                "pol" => pol = Some(v.parse::<Polarization>()?),
                "exposure_pulses" => exposure = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                "mean_photons" => mean = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "efficiency" => eff = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                _ => return Err(Error::Data(format!("unknown header key `{k}`"))),
            }
        }
        let missing = |k: &str| Error::Data(format!("header lacks `{k}`"));
        Ok(DataHeader {
            pol: pol.ok_or_else(|| missing("pol"))?,
            exposure_pulses: exposure.ok_or_else(|| missing("exposure_pulses"))?,
            mean_photons: mean.ok_or_else(|| missing("mean_photons"))?,
            efficiency: eff.ok_or_else(|| missing("efficiency"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}

fn render<T: std::fmt::Display>(header: &DataHeader, grid: &TimeGrid, values: &[T]) -> String {
    let mut s = header.line();
    s.push_str("\nt_ps,value\n");
    for (j, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", grid.t(j), v);
    }
    s
}

pub fn write_counts(rec: &CountRecord) -> String {
    let header = DataHeader {
        pol: rec.pol,
        exposure_pulses: rec.exposure_pulses,
        mean_photons: rec.mean_photons_per_pulse,
        efficiency: rec.detection_efficiency,
        seed: rec.seed,
    };
    render(&header, &rec.grid, &rec.counts)
}

/// Probability densities carry `exposure_pulses=0` to mark them as noiseless.
pub fn write_probabilities(p: &ProjectionDistribution, seed: u64) -> String {
    let header = DataHeader {
        pol: p.pol(),
        exposure_pulses: 0,
        mean_photons: 0.0,
        efficiency: 1.0,
        seed,
    };
    render(&header, p.grid(), p.values())
}

/// Parsed data file before interpretation as counts or densities.
#[derive(Debug, Clone, PartialEq)]
pub struct DataFile {
    pub header: DataHeader,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
    raw: Vec<String>,
}

pub fn parse_data_file(text: &str) -> Result<DataFile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = DataHeader::parse(lines.next().ok_or_else(|| Error::Data("empty file".into()))?.trim())?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut raw = Vec::new();
    for line in lines {
        let line = line.trim();
        if line == "t_ps,value" {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Data(format!("malformed row `{line}`")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Data(format!("malformed row `{line}`")))
        };
        times.push(parse(t)?);
        values.push(parse(v)?);
        raw.push(v.trim().to_string());
    }
    let grid = infer_grid(&times)?;
    Ok(DataFile {
        header,
        grid,
        values,
        raw,
    })
}

/// Uniform grid through the given times; deviations above 1e-6 of the step
/// are rejected. The step is rounded to 12 significant digits so that grids
/// written from decimal configuration values come back bit-identical.
pub fn infer_grid(times: &[f64]) -> Result<TimeGrid> {
    let n = times.len();
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 samples, found {n}")));
    }
    let raw_dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(raw_dt > 0.0) {
        return Err(Error::Data("time column is not increasing".into()));
    }
    let dt: f64 = format!("{raw_dt:.11e}").parse().expect("formatted float parses");
    let grid = TimeGrid::measurement(n, dt, times[n / 2]).map_err(|e| Error::Data(e.to_string()))?;
    for (j, &t) in times.iter().enumerate() {
        if (t - grid.t(j)).abs() > 1e-6 * dt {
            return Err(Error::Data(format!("non-uniform time grid at row {j} (t = {t} ps)")));
        }
    }
    Ok(grid)
}

impl DataFile {
    pub fn into_counts(self) -> Result<CountRecord> {
        let counts = self
            .raw
            .iter()
            .map(|s| {
                s.parse::<u64>().map_err(|_| {
                    if s.starts_with('-') {
                        Error::Data(format!("negative count `{s}`"))
                    } else {
                        Error::Data(format!("count `{s}` is not a non-negative integer"))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CountRecord::new(
            self.grid,
            self.header.pol,
            counts,
            self.header.exposure_pulses,
            self.header.mean_photons,
            self.header.efficiency,
            self.header.seed,
        )
        .map_err(|e| Error::Data(e.to_string()))
    }

    pub fn into_probabilities(self) -> Result<ProjectionDistribution> {
        ProjectionDistribution::new(self.grid, self.header.pol, self.values)
    }
}

pub fn data_file_name(pol: Polarization) -> String {
    format!("P_{pol}.csv")
}

fn read_set(dir: &Path) -> Result<PolarizationSet<DataFile>> {
    PolarizationSet::try_from_fn(|p| {
        let path = dir.join(data_file_name(p));
        if !path.exists() {
            return Err(Error::Data(format!(
                "missing polarization {p}: {} not found",
                path.display()
            )));
        }
        let file = parse_data_file(&std::fs::read_to_string(&path)?)?;
        if file.header.pol != p {
            return Err(Error::Data(format!(
                "{} declares pol={}",
                path.display(),
                file.header.pol
            )));
        }
        Ok(file)
    })
}

/// Reads `P_D.csv`, `P_A.csv`, `P_R.csv`, `P_L.csv` from `dir` as counts.
pub fn ingest_counts(dir: &Path) -> Result<PolarizationSet<CountRecord>> {
    let set = read_set(dir)?;
    let recs = PolarizationSet::try_from_fn(|p| set[p].clone().into_counts())?;
    for (p, r) in recs.iter() {
        if !r.same_exposure(&recs.d) {
            return Err(Error::Data(format!("{p} metadata or grid differs from D")));
        }
    }
    Ok(recs)
}

/// Counts if the files carry an exposure, densities otherwise.
pub enum Ingested {
    Counts(PolarizationSet<CountRecord>),
    Probabilities(PolarizationSet<ProjectionDistribution>),
}

pub fn ingest_dir(dir: &Path) -> Result<Ingested> {
    let set = read_set(dir)?;
    if set.d.header.exposure_pulses > 0 {
        ingest_counts(dir).map(Ingested::Counts)
    } else {
        let p = PolarizationSet::try_from_fn(|p| set[p].clone().into_probabilities())?;
        if p.iter().any(|(_, d)| !d.grid().matches(p.d.grid())) {
            return Err(Error::Data("polarization files use different grids".into()));
        }
        Ok(Ingested::Probabilities(p))
    }
}
