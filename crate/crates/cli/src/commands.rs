//! The four subcommands. Each returns the files it wrote plus any extra
//! facts worth keeping in the manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use beamgp_core::beam_oracle::{solve_truth, synth_dataset, SensorPlan};
use beamgp_core::damage::{
    damage_study, noise_study, CellResult, DamageStudy, NoiseStudy, StudyGrid, StudySettings,
};
use beamgp_core::dataset::{format_f64, parse_problem_csv, Problem, ProblemConfig};
use beamgp_core::fit::{fit, FitResult};
use beamgp_core::inference::{normalized_rmse, predict_mixture_with, MixtureOptions};
use beamgp_core::posterior::ParamVector;
use beamgp_core::sampler::Chain;
use beamgp_core::seed::derive_seed;
use beamgp_core::QuantityKind;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::failure::Failure;

const SYNTH_STREAM: u64 = 1;
const FIT_STREAM: u64 = 2;
const STUDY_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Noise,
    Damage,
}

pub struct Outcome {
    pub outputs: Vec<String>,
    pub derived_seeds: BTreeMap<String, u64>,
    pub details: Value,
}

struct OutDir<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> OutDir<'a> {
    fn new(dir: &'a Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(OutDir {
            dir,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    path.as_deref().ok_or_else(|| {
        Failure::config(format!(
            "missing input; pass {flag} or set it under \"inputs\" in the config"
        ))
    })
}

fn load_problem(cfg: &RunConfig) -> Result<(Problem, ProblemConfig), Failure> {
    let dataset = required(&cfg.inputs.dataset, "--dataset")?;
    let sidecar_path = cfg
        .inputs
        .sidecar()
        .ok_or_else(|| Failure::config("missing dataset sidecar config"))?;
    let sidecar = ProblemConfig::parse(&read(&sidecar_path)?)
        .map_err(|e| Failure::from(e).context(sidecar_path.display()))?;
    let problem = parse_problem_csv(&read(dataset)?, &sidecar)
        .map_err(|e| Failure::from(e).context(dataset.display()))?;
    for w in problem.warnings() {
        eprintln!("warning: {w}");
    }
    Ok((problem, sidecar))
}

pub fn synth(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let data_seed = derive_seed(cfg.seed, &[SYNTH_STREAM]);
    let plan = SensorPlan {
        seed: data_seed,
        ..cfg.sensors.clone()
    };
    let syn = synth_dataset(&cfg.beam, &plan, cfg.truth)?;
    let response = solve_truth(&cfg.beam, cfg.truth)?;

    let mut sidecar = syn.problem.config();
    sidecar.ei_ref = cfg.ei_ref.or(cfg.beam.uniform_ei());

    if cfg.truth_grid_points < 2 {
        return Err(Failure::config("truth_grid_points must be at least 2"));
    }
    let n = cfg.truth_grid_points;
    let length = cfg.beam.length;
    let mut truth_csv = String::from("kind,x,value\n");
    for kind in QuantityKind::ALL {
        if kind == QuantityKind::Strain && plan.fiber_distance.is_none() {
            continue;
        }
        for i in 0..n {
            let x = length * i as f64 / (n - 1) as f64;
            let v = response.eval(kind, x, plan.fiber_distance)?;
            let _ = writeln!(truth_csv, "{kind},{},{}", format_f64(x), format_f64(v));
        }
    }

    let mut dir = OutDir::new(out)?;
    dir.write("dataset.csv", &syn.problem.to_csv())?;
    dir.write("dataset.cfg", &sidecar.to_text())?;
    dir.write("truth.csv", &truth_csv)?;

    let noise: BTreeMap<String, f64> = syn
        .problem
        .sets()
        .iter()
        .zip(&syn.noise_sigmas)
        .map(|(s, sigma)| (s.label.clone(), *sigma))
        .collect();
    println!(
        "synthesized {} observations in {} sets ({} boundary conditions)",
        syn.problem.sets().iter().map(|s| s.len()).sum::<usize>(),
        syn.problem.sets().len(),
        syn.problem.boundary_conditions().len()
    );
    Ok(Outcome {
        outputs: dir.written,
        derived_seeds: BTreeMap::from([("data".to_string(), data_seed)]),
        details: json!({ "true_noise_sigmas": noise }),
    })
}

fn fit_summary_text(res: &FitResult, ei_ref: f64, d_m: Option<f64>) -> String {
    let mut s = String::new();
    let names = &res.summary.names;
    let map = res.map.to_vec();
    let _ = writeln!(s, "stiffness (normalized by EI_ref = {ei_ref})");
    let _ = writeln!(s, "  mu_EI    {:.6}", res.stiffness.mu_ei);
    let _ = writeln!(s, "  sigma_EI {:.6}", res.stiffness.sigma_ei);
    match d_m {
        Some(d) => {
            let _ = writeln!(s, "  d_M      {d:.4}");
        }
        None => {
            let _ = writeln!(s, "  d_M      undefined (zero posterior spread)");
        }
    }
    let _ = writeln!(s, "\nparameters (MAP, mean, std)");
    let width = names.iter().map(|n| n.len()).max().unwrap_or(0);
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {name:<width$}  {:>13.6e}  {:>13.6e}  {:>13.6e}",
            map[i], res.summary.mean[i], res.summary.std[i]
        );
    }
    let _ = writeln!(s, "\ncorrelation");
    for (i, name) in names.iter().enumerate() {
        let row: Vec<String> = res.summary.correlation[i]
            .iter()
            .map(|c| format!("{c:>6.3}"))
            .collect();
        let _ = writeln!(s, "  {name:<width$}  {}", row.join(" "));
    }
    let _ = writeln!(
        s,
        "\nacceptance rate {:.3}, {} retained samples",
        res.chain.acceptance_rate,
        res.chain.len()
    );
    for w in &res.chain.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn fit_cmd(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let (problem, sidecar) = load_problem(cfg)?;
    let ei_ref = cfg.ei_ref.or(sidecar.ei_ref).ok_or_else(|| {
        Failure::config("no reference stiffness; pass --ei-ref or add ei_ref to the sidecar")
    })?;
    let chain_seed = derive_seed(cfg.seed, &[FIT_STREAM]);
    let mut fit_cfg = cfg.fit.clone();
    fit_cfg.mh.seed = chain_seed;
    let res = fit(&problem, ei_ref, &fit_cfg)?;
    let d_m = res.stiffness.mahalanobis().ok();

    let summary = json!({
        "ei_ref": ei_ref,
        "mu_ei": res.stiffness.mu_ei,
        "sigma_ei": res.stiffness.sigma_ei,
        "d_m": d_m,
        "map": res.summary.names.iter().cloned().zip(res.map.to_vec()).collect::<BTreeMap<_, _>>(),
        "summary": res.summary,
        "acceptance_rate": res.chain.acceptance_rate,
        "warnings": res.chain.warnings,
    });
    let text = fit_summary_text(&res, ei_ref, d_m);

    let mut dir = OutDir::new(out)?;
    dir.write("chain.csv", &res.chain.to_csv())?;
    dir.write("summary.json", &format!("{:#}\n", summary))?;
    dir.write("summary.txt", &text)?;
    print!("{text}");
    Ok(Outcome {
        outputs: dir.written,
        derived_seeds: BTreeMap::from([("chain".to_string(), chain_seed)]),
        details: json!({ "mu_ei": res.stiffness.mu_ei, "sigma_ei": res.stiffness.sigma_ei, "d_m": d_m }),
    })
}

fn parse_kinds(tags: &[String]) -> Result<Vec<QuantityKind>, Failure> {
    if tags.is_empty() {
        return Err(Failure::config("no kinds requested"));
    }
    tags.iter()
        .map(|t| {
            t.parse::<QuantityKind>()
                .map_err(|e| Failure::config(e.to_string()))
        })
        .collect()
}

/// Truth locations and values per kind.
type TruthTable = BTreeMap<QuantityKind, (Vec<f64>, Vec<f64>)>;

/// Rows of a truth CSV (`kind,x,value`) grouped by kind.
fn parse_truth(text: &str) -> Result<TruthTable, Failure> {
    let mut out = TruthTable::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: &str| Failure::parse(format!("truth CSV line {}: {m}", i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected kind,x,value"));
        }
        let kind: QuantityKind = f[0].parse().map_err(|_| bad("unknown kind"))?;
        let x: f64 = f[1].trim().parse().map_err(|_| bad("bad x"))?;
        let v: f64 = f[2].trim().parse().map_err(|_| bad("bad value"))?;
        let e = out.entry(kind).or_default();
        e.0.push(x);
        e.1.push(v);
    }
    Ok(out)
}

pub fn predict(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let (problem, _) = load_problem(cfg)?;
    let chain_path = required(&cfg.inputs.chain, "--chain")?;
    let chain = Chain::from_csv(&read(chain_path)?)
        .map_err(|e| Failure::from(e).context(chain_path.display()))?;
    let expected = ParamVector::names(&problem);
    if chain.names != expected {
        return Err(beamgp_core::Error::Consistency(format!(
            "chain columns [{}] do not match the dataset's parameters [{}]",
            chain.names.join(", "),
            expected.join(", ")
        ))
        .into());
    }
    let kinds = parse_kinds(&cfg.predict.kinds)?;
    if cfg.predict.grid_points < 2 {
        return Err(Failure::config("predict.grid_points must be at least 2"));
    }
    if chain.is_empty() {
        return Err(Failure::config(format!(
            "{} has no samples",
            chain_path.display()
        )));
    }
    let opts = MixtureOptions {
        n_draws: cfg.predict.n_draws.min(chain.len()),
        ..Default::default()
    };
    let n = cfg.predict.grid_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| problem.length() * i as f64 / (n - 1) as f64)
        .collect();
    let truth = match &cfg.inputs.truth {
        Some(p) => Some(parse_truth(&read(p)?)?),
        None => None,
    };

    let mut dir = OutDir::new(out)?;
    let mut rmse = BTreeMap::new();
    for kind in kinds {
        let pred = predict_mixture_with(&problem, &chain, kind, &grid, &opts)?;
        dir.write(&format!("pred_{kind}.csv"), &pred.to_csv())?;
        if let Some((xs, ys)) = truth.as_ref().and_then(|t| t.get(&kind)) {
            let at_truth = predict_mixture_with(&problem, &chain, kind, xs, &opts)?;
            rmse.insert(kind.to_string(), normalized_rmse(&at_truth.mean, ys));
        }
    }
    if !rmse.is_empty() {
        let mut csv = String::from("kind,normalized_rmse\n");
        for (k, v) in &rmse {
            let _ = writeln!(csv, "{k},{}", format_f64(*v));
            println!("{k}: normalized RMSE {v:.3e}");
        }
        dir.write("rmse.csv", &csv)?;
    }
    Ok(Outcome {
        outputs: dir.written,
        derived_seeds: BTreeMap::new(),
        details: json!({ "n_draws": opts.n_draws, "normalized_rmse": rmse }),
    })
}

pub fn study(kind: StudyKind, cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let base_seed = derive_seed(cfg.seed, &[STUDY_STREAM]);
    let settings = StudySettings {
        seeds_per_cell: cfg.study.seeds_per_cell,
        base_seed,
        fit: cfg.fit.clone(),
    };
    let name = match kind {
        StudyKind::Noise => "noise",
        StudyKind::Damage => "damage",
    };
    let mut dir = OutDir::new(out)?;
    let partial_name = format!("{name}_long.partial.csv");
    let partial_path = out.join(&partial_name);
    let file = File::create(&partial_path).map_err(|e| Failure::io(&partial_path, e))?;
    let sink = Mutex::new(file);
    let header = match kind {
        StudyKind::Noise => "snr,n_dp,seed,d_m,mu_ei,sigma_ei\n",
        StudyKind::Damage => "element,reduction,seed,d_m,mu_ei,sigma_ei\n",
    };
    sink.lock()
        .unwrap()
        .write_all(header.as_bytes())
        .map_err(|e| Failure::io(&partial_path, e))?;
    // Completed cells are appended and flushed as they finish, so an
    // interrupted study keeps its results.
    let on_cell = |cell: &CellResult| {
        let mut f = sink.lock().unwrap();
        let _ = f.write_all(StudyGrid::long_csv_rows(cell).as_bytes());
        let _ = f.flush();
        eprintln!(
            "cell ({}, {}) done: median d_M {}",
            cell.axis1,
            cell.axis2,
            cell.median_d_m
                .map(|d| format!("{d:.3}"))
                .unwrap_or_else(|| "n/a".into())
        );
    };

    let grid = match kind {
        StudyKind::Noise => {
            let study = NoiseStudy {
                spec: cfg.beam.clone(),
                plan: cfg.sensors.clone(),
                snrs: cfg.study.noise.snrs.clone(),
                points_per_sensor: cfg.study.noise.points_per_sensor.clone(),
                truth: cfg.truth,
            };
            noise_study(&study, &settings, on_cell)?
        }
        StudyKind::Damage => {
            let elements = if cfg.study.damage.elements.is_empty() {
                (1..=cfg.beam.n_elements()).collect()
            } else {
                cfg.study.damage.elements.clone()
            };
            let study = DamageStudy {
                spec: cfg.beam.clone(),
                plan: cfg.sensors.clone(),
                elements,
                reductions: cfg.study.damage.reductions.clone(),
            };
            damage_study(&study, &settings, on_cell)?
        }
    };
    drop(sink);

    // Final files are in grid order, independent of thread scheduling.
    dir.write(&format!("{name}_long.csv"), &grid.to_long_csv())?;
    dir.write(&format!("{name}_summary.csv"), &grid.to_summary_csv())?;
    fs::remove_file(&partial_path).map_err(|e| Failure::io(&partial_path, e))?;

    let failures: Vec<Value> = grid
        .cells
        .iter()
        .flat_map(|c| c.runs.iter())
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| json!({ "axis1": r.axis1, "axis2": r.axis2, "seed": r.seed, "error": e }))
        })
        .collect();
    let flagged: Vec<(f64, f64)> = grid
        .cells
        .iter()
        .filter(|c| c.flagged)
        .map(|c| (c.axis1, c.axis2))
        .collect();
    println!(
        "{} cells, {} replicates each, {} failed replicates",
        grid.cells.len(),
        settings.seeds_per_cell,
        failures.len()
    );
    if !flagged.is_empty() {
        eprintln!(
            "warning: {} cells flagged (most replicates failed):",
            flagged.len()
        );
        for (a, b) in &flagged {
            eprintln!("  {} = {a}, {} = {b}", grid.axis1_name, grid.axis2_name);
        }
    }
    let flagged_json: Vec<Value> = flagged
        .iter()
        .map(|(a, b)| json!({ grid.axis1_name.clone(): a.to_string(), grid.axis2_name.clone(): b.to_string() }))
        .collect();
    Ok(Outcome {
        outputs: dir.written,
        derived_seeds: BTreeMap::from([("study_base".to_string(), base_seed)]),
        details: json!({ "study": name, "failed_replicates": failures, "flagged_cells": flagged_json }),
    })
}
