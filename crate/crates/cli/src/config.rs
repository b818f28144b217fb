//! Run configuration: defaults, JSON file, then command-line overrides.

use std::path::{Path, PathBuf};

use beamgp_core::beam_oracle::{BeamSpec, SensorPlan, Support, Truth};
use beamgp_core::fit::FitConfig;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

/// Everything a subcommand needs besides the output directory. The manifest
/// stores the resolved value, so `--config <manifest.json>` replays a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub beam: BeamSpec,
    pub truth: Truth,
    /// Sensor layout for `synth`; its seed is replaced by a derived one.
    pub sensors: SensorPlan,
    /// Sampler, prior and jitter settings; the chain seed is derived.
    pub fit: FitConfig,
    /// Normalizing stiffness; falls back to the dataset sidecar.
    pub ei_ref: Option<f64>,
    pub inputs: Inputs,
    pub predict: PredictSettings,
    pub study: StudyConfig,
    /// Points in the dense truth CSV written by `synth`.
    pub truth_grid_points: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            beam: BeamSpec::uniform(1.0, 1.0, 20, Support::CantileverLeft, 1.0),
            truth: Truth::Analytic,
            sensors: SensorPlan {
                fiber_distance: Some(0.1),
                ..SensorPlan::benchmark(1.0)
            },
            fit: FitConfig::default(),
            ei_ref: None,
            inputs: Inputs::default(),
            predict: PredictSettings::default(),
            study: StudyConfig::default(),
            truth_grid_points: 201,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub dataset: Option<PathBuf>,
    /// Sidecar config; defaults to the dataset path with extension `cfg`.
    pub problem: Option<PathBuf>,
    pub chain: Option<PathBuf>,
    /// Dense truth CSV for RMSE scoring in `predict`.
    pub truth: Option<PathBuf>,
}

impl Inputs {
    pub fn sidecar(&self) -> Option<PathBuf> {
        self.problem
            .clone()
            .or_else(|| self.dataset.as_ref().map(|d| d.with_extension("cfg")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSettings {
    /// Kind tags: u, r, eps, m, v, q.
    pub kinds: Vec<String>,
    pub grid_points: usize,
    pub n_draws: usize,
}

impl Default for PredictSettings {
    fn default() -> Self {
        PredictSettings {
            kinds: ["u", "r", "eps", "m", "v"].map(String::from).to_vec(),
            grid_points: 50,
            n_draws: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub seeds_per_cell: usize,
    pub noise: NoiseAxes,
    pub damage: DamageAxes,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            seeds_per_cell: 5,
            noise: NoiseAxes::default(),
            damage: DamageAxes::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseAxes {
    #[serde(with = "snr_list")]
    pub snrs: Vec<f64>,
    pub points_per_sensor: Vec<usize>,
}

impl Default for NoiseAxes {
    fn default() -> Self {
        NoiseAxes {
            snrs: vec![5.0, 10.0, 20.0, 50.0, f64::INFINITY],
            points_per_sensor: vec![2, 5, 10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DamageAxes {
    /// 1-based element indices; empty means every element.
    pub elements: Vec<usize>,
    pub reductions: Vec<f64>,
}

impl Default for DamageAxes {
    fn default() -> Self {
        DamageAxes {
            elements: Vec::new(),
            reductions: vec![0.1, 0.2, 0.3, 0.4],
        }
    }
}

mod snr_list {
    use beamgp_core::beam_oracle::snr_serde;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Snr(#[serde(with = "snr_serde")] f64);

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| Snr(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Snr>::deserialize(d)?
            .into_iter()
            .map(|s| s.0)
            .collect())
    }
}

/// Reads a run config or a manifest written by an earlier run.
pub fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::parse(format!("{}: line {}: {e}", path.display(), e.line())))?;
    let value = match value.get("manifest_version") {
        Some(_) => value.get("config").cloned().ok_or_else(|| {
            Failure::config(format!("{}: manifest has no config", path.display()))
        })?,
        None => value,
    };
    serde_json::from_value(value).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}
