//! Mahalanobis stiffness scoring and the two parameter studies: measurement
//! quality (SNR × readings per sensor) and damage (element × severity).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::beam_oracle::{synth_dataset, BeamSpec, SensorPlan, Truth};
use crate::dataset::format_f64;
use crate::error::{Error, Result};
use crate::fit::{fit, FitConfig};
use crate::seed::derive_seed;

/// Stiffness posterior normalized by a reference stiffness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessPosterior {
    /// Mean of EI / EI_ref.
    pub mu_ei: f64,
    /// Standard deviation of EI / EI_ref.
    pub sigma_ei: f64,
    pub n_samples: usize,
    pub ei_ref: f64,
}

impl StiffnessPosterior {
    pub fn from_samples(ei_samples: &[f64], ei_ref: f64) -> Result<Self> {
        if ei_samples.len() < 2 {
            return Err(Error::ContractViolation(
                "stiffness posterior needs at least 2 samples".into(),
            ));
        }
        if !(ei_ref.is_finite() && ei_ref > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference stiffness must be positive, got {ei_ref}"
            )));
        }
        let n = ei_samples.len() as f64;
        let normalized: Vec<f64> = ei_samples.iter().map(|e| e / ei_ref).collect();
        let mu = normalized.iter().sum::<f64>() / n;
        let var = normalized.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0);
        Ok(StiffnessPosterior {
            mu_ei: mu,
            sigma_ei: var.sqrt(),
            n_samples: ei_samples.len(),
            ei_ref,
        })
    }

    pub fn mahalanobis(&self) -> Result<f64> {
        mahalanobis(self.mu_ei, self.sigma_ei)
    }
}

/// `d_M = |µ − 1| / σ` for a normalized stiffness posterior N(µ, σ).
pub fn mahalanobis(mu_ei: f64, sigma_ei: f64) -> Result<f64> {
    if !mu_ei.is_finite() || !sigma_ei.is_finite() || sigma_ei < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "invalid stiffness posterior ({mu_ei}, {sigma_ei})"
        )));
    }
    if sigma_ei == 0.0 {
        return Err(Error::DegeneratePosterior);
    }
    Ok((mu_ei - 1.0).abs() / sigma_ei)
}

/// Seeds, fit settings and replication count shared by both studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySettings {
    pub seeds_per_cell: usize,
    pub base_seed: u64,
    pub fit: FitConfig,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings {
            seeds_per_cell: 5,
            base_seed: 0,
            fit: FitConfig::default(),
        }
    }
}

/// One synthesize-and-fit replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub axis1: f64,
    pub axis2: f64,
    /// Seed of the synthetic noise; the chain seed derives from the same
    /// replicate index.
    pub seed: u64,
    pub d_m: Option<f64>,
    pub mu_ei: Option<f64>,
    pub sigma_ei: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub axis1: f64,
    pub axis2: f64,
    pub runs: Vec<RunRecord>,
    pub median_d_m: Option<f64>,
    pub median_mu_ei: Option<f64>,
    pub median_sigma_ei: Option<f64>,
    /// More than half of the replicates failed.
    pub flagged: bool,
}

impl CellResult {
    fn from_runs(axis1: f64, axis2: f64, runs: Vec<RunRecord>) -> Self {
        let col = |f: fn(&RunRecord) -> Option<f64>| median(runs.iter().filter_map(f).collect());
        let failures = runs.iter().filter(|r| r.error.is_some()).count();
        CellResult {
            axis1,
            axis2,
            median_d_m: col(|r| r.d_m),
            median_mu_ei: col(|r| r.mu_ei),
            median_sigma_ei: col(|r| r.sigma_ei),
            flagged: 2 * failures > runs.len(),
            runs,
        }
    }
}

/// Median; the mean of the middle pair for even counts.
pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Rectangular grid of study cells, row-major over `axis1 × axis2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyGrid {
    pub axis1_name: String,
    pub axis2_name: String,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub cells: Vec<CellResult>,
}

impl StudyGrid {
    pub fn cell(&self, axis1: f64, axis2: f64) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.axis1 == axis1 && c.axis2 == axis2)
    }

    pub fn long_csv_header(&self) -> String {
        format!(
            "{},{},seed,d_m,mu_ei,sigma_ei\n",
            self.axis1_name, self.axis2_name
        )
    }

    /// Rows of one cell in long form (`axis1,axis2,seed,d_m,mu_ei,sigma_ei`).
    /// Failed replicates leave the value columns empty.
    pub fn long_csv_rows(cell: &CellResult) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for r in &cell.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.axis1,
                r.axis2,
                r.seed,
                opt(r.d_m),
                opt(r.mu_ei),
                opt(r.sigma_ei)
            );
        }
        out
    }

    pub fn to_long_csv(&self) -> String {
        let mut out = self.long_csv_header();
        for cell in &self.cells {
            out.push_str(&Self::long_csv_rows(cell));
        }
        out
    }

    /// One row per cell with medians, ready for heatmaps.
    pub fn to_summary_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        let mut out = format!(
            "{},{},median_d_m,median_mu_ei,median_sigma_ei,runs,failed,flagged\n",
            self.axis1_name, self.axis2_name
        );
        for c in &self.cells {
            let failed = c.runs.iter().filter(|r| r.error.is_some()).count();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.axis1,
                c.axis2,
                opt(c.median_d_m),
                opt(c.median_mu_ei),
                opt(c.median_sigma_ei),
                c.runs.len(),
                failed,
                c.flagged
            );
        }
        out
    }
}

/// SNR × readings-per-sensor study on a uniform beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudy {
    pub spec: BeamSpec,
    /// Template plan; its SNR and `points_per_sensor` are overwritten per cell.
    pub plan: SensorPlan,
    #[serde(with = "snr_list")]
    pub snrs: Vec<f64>,
    pub points_per_sensor: Vec<usize>,
    pub truth: Truth,
}

/// Single-element damage study: one element at a time loses a fraction of
/// its stiffness, the GP still assumes uniform EI, and d_M is measured
/// against the undamaged stiffness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DamageStudy {
    /// Undamaged beam; must have uniform stiffness.
    pub spec: BeamSpec,
    pub plan: SensorPlan,
    /// 1-based element indices.
    pub elements: Vec<usize>,
    /// Stiffness reductions in [0, 1); remaining stiffness is `1 − reduction`.
    pub reductions: Vec<f64>,
}

mod snr_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Snr(#[serde(with = "crate::beam_oracle::snr_serde")] f64);

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

/// Data-noise seed and chain seed for replicate `k`. Both depend only on the
/// replicate index, so every cell sees the same underlying random streams.
pub fn replicate_seeds(base_seed: u64, k: usize) -> (u64, u64) {
    (
        derive_seed(base_seed, &[1, k as u64]),
        derive_seed(base_seed, &[2, k as u64]),
    )
}

fn run_replicate(
    spec: &BeamSpec,
    plan: &SensorPlan,
    truth: Truth,
    ei_ref: f64,
    settings: &StudySettings,
    k: usize,
    axes: (f64, f64),
) -> RunRecord {
    let (data_seed, chain_seed) = replicate_seeds(settings.base_seed, k);
    let plan = SensorPlan {
        seed: data_seed,
        ..plan.clone()
    };
    let mut cfg = settings.fit.clone();
    cfg.mh.seed = chain_seed;
    let outcome = synth_dataset(spec, &plan, truth)
        .and_then(|syn| fit(&syn.problem, ei_ref, &cfg))
        .and_then(|res| Ok((res.stiffness, res.stiffness.mahalanobis()?)));
    match outcome {
        Ok((post, d_m)) => RunRecord {
            axis1: axes.0,
            axis2: axes.1,
            seed: data_seed,
            d_m: Some(d_m),
            mu_ei: Some(post.mu_ei),
            sigma_ei: Some(post.sigma_ei),
            error: None,
        },
        Err(e) => RunRecord {
            axis1: axes.0,
            axis2: axes.1,
            seed: data_seed,
            d_m: None,
            mu_ei: None,
            sigma_ei: None,
            error: Some(e.to_string()),
        },
    }
}

struct CellJob {
    axes: (f64, f64),
    spec: BeamSpec,
    plan: SensorPlan,
    truth: Truth,
}

fn run_grid<F>(
    jobs: Vec<CellJob>,
    ei_ref: f64,
    settings: &StudySettings,
    on_cell: F,
) -> Vec<CellResult>
where
    F: Fn(&CellResult) + Sync,
{
    let run_cell = |job: &CellJob| {
        let runs_for = |k: usize| {
            run_replicate(
                &job.spec, &job.plan, job.truth, ei_ref, settings, k, job.axes,
            )
        };
        #[cfg(feature = "parallel")]
        let runs: Vec<RunRecord> = {
            use rayon::prelude::*;
            (0..settings.seeds_per_cell)
                .into_par_iter()
                .map(runs_for)
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let runs: Vec<RunRecord> = (0..settings.seeds_per_cell).map(runs_for).collect();
        let cell = CellResult::from_runs(job.axes.0, job.axes.1, runs);
        on_cell(&cell);
        cell
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(run_cell).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(run_cell).collect()
    }
}

pub fn noise_study<F>(study: &NoiseStudy, settings: &StudySettings, on_cell: F) -> Result<StudyGrid>
where
    F: Fn(&CellResult) + Sync,
{
    if study.snrs.is_empty() || study.points_per_sensor.is_empty() || settings.seeds_per_cell == 0 {
        return Err(Error::InvalidArgument(
            "noise study needs SNRs, N_dp values and at least one seed".into(),
        ));
    }
    let ei_ref = study.spec.uniform_ei().ok_or_else(|| {
        Error::InvalidArgument("noise study needs a uniform-stiffness beam".into())
    })?;
    let mut jobs = Vec::new();
    for &snr in &study.snrs {
        for &ndp in &study.points_per_sensor {
            let plan = SensorPlan {
                snr,
                points_per_sensor: ndp,
                ..study.plan.clone()
            };
            plan.validate(study.spec.length)?;
            jobs.push(CellJob {
                axes: (snr, ndp as f64),
                spec: study.spec.clone(),
                plan,
                truth: study.truth,
            });
        }
    }
    let cells = run_grid(jobs, ei_ref, settings, on_cell);
    Ok(StudyGrid {
        axis1_name: "snr".into(),
        axis2_name: "n_dp".into(),
        axis1: study.snrs.clone(),
        axis2: study.points_per_sensor.iter().map(|n| *n as f64).collect(),
        cells,
    })
}

pub fn damage_study<F>(
    study: &DamageStudy,
    settings: &StudySettings,
    on_cell: F,
) -> Result<StudyGrid>
where
    F: Fn(&CellResult) + Sync,
{
    if study.elements.is_empty() || study.reductions.is_empty() || settings.seeds_per_cell == 0 {
        return Err(Error::InvalidArgument(
            "damage study needs elements, reductions and at least one seed".into(),
        ));
    }
    study.spec.validate()?;
    let ei_ref = study.spec.uniform_ei().ok_or_else(|| {
        Error::InvalidArgument("damage study needs an undamaged uniform beam".into())
    })?;
    let n_el = study.spec.n_elements();
    let mut jobs = Vec::new();
    for &element in &study.elements {
        if element == 0 || element > n_el {
            return Err(Error::InvalidArgument(format!(
                "element {element} outside 1..={n_el}"
            )));
        }
        for &reduction in &study.reductions {
            if !(0.0..1.0).contains(&reduction) {
                return Err(Error::InvalidArgument(format!(
                    "stiffness reduction {reduction} outside [0, 1)"
                )));
            }
            let mut spec = study.spec.clone();
            spec.ei_elements[element - 1] *= 1.0 - reduction;
            jobs.push(CellJob {
                axes: (element as f64, reduction),
                spec,
                plan: study.plan.clone(),
                truth: Truth::Fe,
            });
        }
    }
    let cells = run_grid(jobs, ei_ref, settings, on_cell);
    Ok(StudyGrid {
        axis1_name: "element".into(),
        axis2_name: "reduction".into(),
        axis1: study.elements.iter().map(|e| *e as f64).collect(),
        axis2: study.reductions.clone(),
        cells,
    })
}
