//! Named runs that regenerate each figure and table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use tempwave::analysis::{fit_linear_law, subtract_offset_at_zero, write_sweep, Domain, LinearLaw, SweepPoint};
use tempwave::config::Prep;
use tempwave::pipeline::{run, RunResult};
use tempwave::signal_prep::SlitSpec;
use tempwave::RunConfig;

use crate::files::{write_data, write_json, write_reconstruction_files, write_scores, write_text, write_truth};
use crate::{UsageError, CODE_VERSION};

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    /// Overrides applied on top of the defaults before any user config.
    pub preset: &'static str,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "fig3",
        description: "slit: projections, reconstructed envelope and sinc-width fit",
        preset: "prep = slit",
    },
    Scenario {
        name: "fig4",
        description: "slit width and position sweeps with fitted laws",
        preset: "prep = slit",
    },
    Scenario {
        name: "fig5",
        description: "slit with glass phase step: envelope and spectral phase",
        preset: "prep = slit+glass",
    },
    Scenario {
        name: "fig6",
        description: "two-band stripe mask with two phase steps",
        preset: "prep = stripe",
    },
    Scenario {
        name: "table1",
        description: "time and frequency fidelity for all three preparations",
        preset: "",
    },
];

pub const WIDTH_SWEEP_MM: [f64; 5] = [1.4, 1.7, 2.0, 2.3, 2.6];
pub const SHIFT_SWEEP_MM: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];

pub fn find(name: &str) -> Result<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<_> = SCENARIOS.iter().map(|s| s.name).collect();
        UsageError(format!("unknown scenario `{name}` (known: {})", names.join(", "))).into()
    })
}

/// Defaults, then the scenario preset, then the user's file.
pub fn scenario_config(name: &str, user: Option<&str>) -> Result<RunConfig> {
    let sc = find(name)?;
    let mut cfg = RunConfig::parse(sc.preset)?;
    if let Some(text) = user {
        cfg.apply(text)?;
    }
    cfg.scenario = Some(name.to_string());
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityRow {
    pub figure: String,
    pub prep: String,
    pub noise: String,
    pub domain: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Laws {
    pub width_sweep: Vec<SweepPoint>,
    pub expected_widths: Vec<f64>,
    pub phase_sweep: Vec<SweepPoint>,
    pub phase_law: LinearLaw,
    pub expected_slope: f64,
    pub kappa0: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioReport {
    pub fidelities: Vec<FidelityRow>,
    pub laws: Option<Laws>,
}

fn domain_name(d: Domain) -> &'static str {
    match d {
        Domain::Time => "time",
        Domain::Frequency => "frequency",
    }
}

fn rows(figure: &str, cfg: &RunConfig, r: &RunResult) -> Vec<FidelityRow> {
    [&r.scores.time_fidelity, &r.scores.frequency_fidelity]
        .iter()
        .map(|f| FidelityRow {
            figure: figure.to_string(),
            prep: cfg.prep.to_string(),
            noise: cfg.noise.to_string(),
            domain: domain_name(f.domain).to_string(),
            value: f.value,
        })
        .collect()
}

/// Everything a single run produces, written into `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, r: &RunResult) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = cfg.clone();
    manifest.code_version = Some(CODE_VERSION.to_string());
    write_text(&dir.join("manifest.cfg"), &manifest.to_text())?;
    write_data(dir, &r.experiment, cfg.seed)?;
    write_truth(dir, &r.experiment)?;
    write_reconstruction_files(dir, &r.reconstruction)?;
    write_scores(dir, &r.scores)
}

fn fidelity_table(rows: &[FidelityRow]) -> String {
    let mut s = String::from("figure,prep,noise,domain,value\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.figure, r.prep, r.noise, r.domain, r.value);
    }
    s
}

/// Width and phase-gradient sweeps on the slit. Returns the fitted laws.
pub fn sweeps(cfg: &RunConfig, out: Option<&Path>) -> Result<Laws> {
    let mut width_sweep = Vec::new();
    let mut expected_widths = Vec::new();
    for &w in &WIDTH_SWEEP_MM {
        let mut c = cfg.clone();
        c.w_mm = w;
        c.s_mm = 0.0;
        c.scenario = Some("fig3".into());
        let r = run(&c)?;
        let fit = r
            .scores
            .sinc_fit
            .as_ref()
            .context(format!("sinc fit failed at w = {w} mm"))?;
        width_sweep.push(SweepPoint {
            param: w,
            estimate: fit.param("delta_t"),
            stderr: fit.param_stderr("delta_t"),
        });
        expected_widths.push(SlitSpec::new(w, 0.0, c.alpha_thz_per_mm)?.expected_zero_spacing());
        if let Some(dir) = out {
            write_run(&dir.join(format!("w_{w}")), &c, &r)?;
        }
    }
    let mut raw_phase = Vec::new();
    for &s in &SHIFT_SWEEP_MM {
        let mut c = cfg.clone();
        c.s_mm = s;
        c.scenario = Some("fig3".into());
        let r = run(&c)?;
        let fit = r
            .scores
            .phase_fit
            .as_ref()
            .context(format!("phase fit failed at s = {s} mm"))?;
        raw_phase.push(SweepPoint {
            param: s,
            estimate: fit.param("kappa"),
            stderr: fit.param_stderr("kappa"),
        });
        if let Some(dir) = out {
            write_run(&dir.join(format!("s_{s}")), &c, &r)?;
        }
    }
    let kappa0 = raw_phase[0].estimate;
    let phase_sweep = subtract_offset_at_zero(&raw_phase)?;
    let phase_law = fit_linear_law(&phase_sweep)?;
    Ok(Laws {
        width_sweep,
        expected_widths,
        phase_sweep,
        phase_law,
        expected_slope: cfg.alpha_thz_per_mm,
        kappa0,
    })
}

/// Runs `cfg.scenario` and writes its outputs into `out`.
pub fn run_scenario(cfg: &RunConfig, out: &Path) -> Result<ScenarioReport> {
    let name = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| UsageError("no scenario named on the command line or in the config".into()))?;
    find(name)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut manifest = cfg.clone();
    manifest.code_version = Some(CODE_VERSION.to_string());
    let mut report = ScenarioReport::default();
    match name {
        "fig4" => {
            let laws = sweeps(cfg, Some(out))?;
            write_text(&out.join("width_sweep.csv"), &write_sweep(&laws.width_sweep))?;
            write_text(&out.join("phase_sweep.csv"), &write_sweep(&laws.phase_sweep))?;
            write_json(&out.join("laws.json"), &laws)?;
            report.laws = Some(laws);
        }
        "table1" => {
            for (figure, prep) in [("fig3", Prep::Slit), ("fig5", Prep::SlitGlass), ("fig6", Prep::Stripe)] {
                let mut c = cfg.clone();
                c.prep = prep;
                c.scenario = Some(figure.to_string());
                let r = run(&c)?;
                write_run(&out.join(figure), &c, &r)?;
                report.fidelities.extend(rows(figure, &c, &r));
            }
            write_text(&out.join("table1.csv"), &fidelity_table(&report.fidelities))?;
        }
        _ => {
            let r = run(cfg)?;
            write_run(out, cfg, &r)?;
            report.fidelities = rows(name, cfg, &r);
        }
    }
    // written last so a scenario's top-level manifest wins over a nested run's
    write_text(&out.join("manifest.cfg"), &manifest.to_text())?;
    Ok(report)
}
