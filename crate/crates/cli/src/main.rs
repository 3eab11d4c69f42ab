use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tempwave::analysis::FitReport;
use tempwave::analysis::{classical_fidelity, Domain};
use tempwave::apparatus::csv::{ingest_dir, Ingested};
use tempwave::apparatus::run_experiment;
use tempwave::config::NoiseMode;
use tempwave::pipeline::{fit_envelope, frequency_fidelity};
use tempwave::reconstruct::{parse_reconstruction, raw_from_counts, raw_from_probabilities, reconstruct};
use tempwave::RunConfig;

use tempwave_cli::files::{
    read_envelope, read_spectrum, write_data, write_json, write_reconstruction_files, write_text, write_truth,
};
use tempwave_cli::scenario::{scenario_config, SCENARIOS};
use tempwave_cli::{exit_code, run_scenario, UsageError, CODE_VERSION};

#[derive(Parser)]
#[command(
    name = "tempwave",
    version,
    about = "Simulate, reconstruct and score temporal wavefunction measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// `key = value` config file applied over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["noiseless", "cl", "spl"])]
    noise: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the four projection measurements and write them with the ground truth.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an envelope from P_D/P_A/P_R/P_L files.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Directory holding the four polarization files.
        #[arg(long)]
        input: PathBuf,
        /// Output directory (defaults to the input directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit sinc width and phase gradient to a reconstruction.csv.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a reconstruction directory against truth files.
    Fidelity {
        /// Directory with reconstruction.csv and spectrum.csv.
        #[arg(long)]
        input: PathBuf,
        /// Directory with truth_time.csv and truth_spectrum.csv (defaults to the input).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a named scenario; the name may also come from the config's `scenario` key.
    Scenario {
        name: Option<String>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

impl Common {
    fn user_text(&self) -> Result<Option<String>> {
        self.config.as_deref().map(read).transpose()
    }

    fn apply_flags(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(noise) = &self.noise {
            cfg.noise = noise.parse::<NoiseMode>().map_err(UsageError)?;
        }
        Ok(())
    }

    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let (Some(text), Some(path)) = (self.user_text()?, &self.config) {
            cfg.apply(&text).with_context(|| format!("in {}", path.display()))?;
        }
        self.apply_flags(&mut cfg)?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct Fits {
    sinc_fit: Option<FitReport>,
    phase_fit: Option<FitReport>,
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, out } => {
            let cfg = common.config()?;
            let experiment = run_experiment(&cfg.experiment()?)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut manifest = cfg.clone();
            manifest.code_version = Some(CODE_VERSION.to_string());
            write_text(&out.join("manifest.cfg"), &manifest.to_text())?;
            write_data(&out, &experiment, cfg.seed)?;
            write_truth(&out, &experiment)?;
        }
        Command::Reconstruct { common, input, out } => {
            let cfg = common.config()?;
            let raw = match ingest_dir(&input)? {
                Ingested::Counts(c) => raw_from_counts(&c)?,
                Ingested::Probabilities(p) => raw_from_probabilities(&p)?,
            };
            let rec = reconstruct(&raw, &cfg.reconstruction()?)?;
            let out = out.unwrap_or(input);
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_reconstruction_files(&out, &rec)?;
        }
        Command::Fit { common, input, out } => {
            let cfg = common.config()?;
            let (est, valid) = parse_reconstruction(&read(&input)?)?;
            let (sinc_fit, phase_fit) = fit_envelope(&est.envelope, &valid, cfg.phase_window_half_ps);
            let fits = Fits { sinc_fit, phase_fit };
            match out {
                Some(path) => write_json(&path, &fits)?,
                None => println!("{}", serde_json::to_string_pretty(&fits)?),
            }
        }
        Command::Fidelity { input, truth } => {
            let truth = truth.unwrap_or_else(|| input.clone());
            let (est, valid) = parse_reconstruction(&read(&input.join("reconstruction.csv"))?)?;
            let t = read_envelope(&read(&truth.join("truth_time.csv"))?)?;
            if !t.grid().matches(est.envelope.grid()) {
                return Err(tempwave::Error::GridMismatch.into());
            }
            let (p, q): (Vec<f64>, Vec<f64>) = est
                .envelope
                .amplitudes()
                .iter()
                .zip(t.amplitudes())
                .zip(&valid)
                .filter(|(_, &v)| v)
                .map(|((a, b), _)| (a.norm_sqr(), b.norm_sqr()))
                .unzip();
            let time = classical_fidelity(&p, &q, Domain::Time)?;
            let rec_spec = read_spectrum(&read(&input.join("spectrum.csv"))?)?;
            let truth_spec = read_spectrum(&read(&truth.join("truth_spectrum.csv"))?)?;
            let freq = frequency_fidelity(&rec_spec, &truth_spec)?;
            println!("domain,value,bin_count");
            println!("time,{},{}", time.value, time.bin_count);
            println!("frequency,{},{}", freq.value, freq.bin_count);
        }
        Command::Scenario { name, common, out } => {
            let user = common.user_text()?;
            let name = match name {
                Some(n) => n,
                None => RunConfig::parse(user.as_deref().unwrap_or(""))?
                    .scenario
                    .ok_or_else(|| UsageError("give a scenario name or set `scenario` in the config".into()))?,
            };
            let mut cfg = scenario_config(&name, user.as_deref())?;
            common.apply_flags(&mut cfg)?;
            let report = run_scenario(&cfg, &out)?;
            for row in &report.fidelities {
                println!(
                    "{} {} {} {}: {:.6}",
                    row.figure, row.prep, row.noise, row.domain, row.value
                );
            }
            if let Some(laws) = &report.laws {
                for (p, want) in laws.width_sweep.iter().zip(&laws.expected_widths) {
                    println!("w = {} mm: width {:.4} ps (expected {:.4})", p.param, p.estimate, want);
                }
                println!(
                    "phase law: slope {:.4} rad/ps/mm (expected {:.4}), kappa0 {:.4}",
                    laws.phase_law.slope, laws.expected_slope, laws.kappa0
                );
            }
        }
        Command::ListScenarios => {
            for s in SCENARIOS {
                println!("{:<8} {}", s.name, s.description);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
