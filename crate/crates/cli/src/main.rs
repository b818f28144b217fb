//! `beamgp`: synthesize beam data, fit the stiffness, predict latent fields
//! and run parameter studies.

mod commands;
mod config;
mod failure;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beamgp_core::beam_oracle::{parse_snr, Truth};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use commands::{Outcome, StudyKind};
use config::RunConfig;
use failure::Failure;

#[derive(Parser)]
#[command(
    name = "beamgp",
    version,
    about = "Physics-informed GP stiffness regression for beams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run config, or a manifest.json from an earlier run to replay it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every random stream is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TruthArg {
    Analytic,
    Fe,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyArg {
    Noise,
    Damage,
}

#[derive(Subcommand)]
enum Command {
    /// Write a noisy synthetic dataset, its sidecar and a dense truth CSV.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Signal-to-noise ratio for every sensor group ("inf" for noiseless).
        #[arg(long, value_parser = parse_snr)]
        snr: Option<f64>,
        /// Readings per sensor location.
        #[arg(long)]
        points_per_sensor: Option<usize>,
        #[arg(long, value_enum)]
        truth: Option<TruthArg>,
    },
    /// Sample the parameter posterior for a dataset.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Sidecar config (defaults to the dataset path with extension .cfg).
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        ei_ref: Option<f64>,
        /// Total MH steps.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        burn_in: Option<usize>,
    },
    /// Mixture predictions of latent fields from a fitted chain.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        chain: Option<PathBuf>,
        /// Comma-separated kind tags (u, r, eps, m, v, q).
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<String>>,
        /// Number of equally spaced prediction points over the beam.
        #[arg(long)]
        grid: Option<usize>,
        /// Chain draws in the mixture.
        #[arg(long)]
        draws: Option<usize>,
        /// Truth CSV from `synth` for normalized RMSE scoring.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a noise (SNR x readings) or damage (element x reduction) study.
    Study {
        #[arg(value_enum)]
        kind: StudyArg,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seeds_per_cell: Option<usize>,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    manifest_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    derived_seeds: &'a BTreeMap<String, u64>,
    threads: Option<usize>,
    config: &'a RunConfig,
    outputs: &'a [String],
    details: &'a serde_json::Value,
}

fn absolute(path: PathBuf) -> Result<PathBuf, Failure> {
    std::fs::canonicalize(&path).map_err(|e| Failure::io(&path, e))
}

fn base_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Input paths are stored absolute so a manifest replays from any directory.
fn resolve_inputs(cfg: &mut RunConfig) -> Result<(), Failure> {
    let inputs = &mut cfg.inputs;
    for slot in [
        &mut inputs.dataset,
        &mut inputs.problem,
        &mut inputs.chain,
        &mut inputs.truth,
    ] {
        if let Some(p) = slot.take() {
            *slot = Some(absolute(p)?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (name, common, cfg) = match cli.command {
        Command::Synth {
            common,
            snr,
            points_per_sensor,
            truth,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(s) = snr {
                cfg.sensors.snr = s;
                cfg.sensors.groups.iter_mut().for_each(|g| g.snr = None);
            }
            if let Some(n) = points_per_sensor {
                cfg.sensors.points_per_sensor = n;
            }
            if let Some(t) = truth {
                cfg.truth = match t {
                    TruthArg::Analytic => Truth::Analytic,
                    TruthArg::Fe => Truth::Fe,
                };
            }
            ("synth", common, cfg)
        }
        Command::Fit {
            common,
            dataset,
            problem,
            ei_ref,
            steps,
            burn_in,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.inputs.dataset = dataset.or(cfg.inputs.dataset);
            cfg.inputs.problem = problem.or(cfg.inputs.problem);
            cfg.ei_ref = ei_ref.or(cfg.ei_ref);
            if let Some(s) = steps {
                cfg.fit.mh.n_steps = s;
            }
            if let Some(b) = burn_in {
                cfg.fit.mh.burn_in = b;
            }
            ("fit", common, cfg)
        }
        Command::Predict {
            common,
            dataset,
            problem,
            chain,
            kinds,
            grid,
            draws,
            truth,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.inputs.dataset = dataset.or(cfg.inputs.dataset);
            cfg.inputs.problem = problem.or(cfg.inputs.problem);
            cfg.inputs.chain = chain.or(cfg.inputs.chain);
            cfg.inputs.truth = truth.or(cfg.inputs.truth);
            if let Some(k) = kinds {
                cfg.predict.kinds = k;
            }
            if let Some(g) = grid {
                cfg.predict.grid_points = g;
            }
            if let Some(d) = draws {
                cfg.predict.n_draws = d;
            }
            ("predict", common, cfg)
        }
        Command::Study {
            kind,
            common,
            seeds_per_cell,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(n) = seeds_per_cell {
                cfg.study.seeds_per_cell = n;
            }
            let name = match kind {
                StudyArg::Noise => "study-noise",
                StudyArg::Damage => "study-damage",
            };
            (name, common, cfg)
        }
    };
    let mut cfg = cfg;
    resolve_inputs(&mut cfg)?;

    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    }

    let out = common.out_dir.as_path();
    let outcome: Outcome = match name {
        "synth" => commands::synth(&cfg, out)?,
        "fit" => commands::fit_cmd(&cfg, out)?,
        "predict" => commands::predict(&cfg, out)?,
        "study-noise" => commands::study(StudyKind::Noise, &cfg, out)?,
        _ => commands::study(StudyKind::Damage, &cfg, out)?,
    };
    write_manifest(name, &cfg, common.threads, &outcome, out)
}

fn write_manifest(
    name: &str,
    cfg: &RunConfig,
    threads: Option<usize>,
    outcome: &Outcome,
    out: &Path,
) -> Result<(), Failure> {
    let mut outputs = outcome.outputs.clone();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        manifest_version: 1,
        tool: "beamgp",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        seed: cfg.seed,
        derived_seeds: &outcome.derived_seeds,
        threads,
        config: cfg,
        outputs: &outputs,
        details: &outcome.details,
    };
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| Failure::config(e.to_string()))?;
    let path = out.join("manifest.json");
    std::fs::write(&path, text + "\n").map_err(|e| Failure::io(&path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("beamgp: {f}");
            ExitCode::from(f.code() as u8)
        }
    }
}
