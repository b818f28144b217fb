mod support;

use beamgp_core::beam_oracle::{synth_dataset, BeamSpec, SensorPlan, Support, Truth};
use beamgp_core::damage::{damage_study, noise_study, DamageStudy, NoiseStudy, StudySettings};
use beamgp_core::fit::{fit, FitConfig};
use beamgp_core::sampler::MHConfig;
use std::sync::Mutex;
use support::{bench_plan, bench_spec};

fn quick_settings(seeds: usize) -> StudySettings {
    let mut fit = FitConfig::default();
    fit.mh = MHConfig {
        n_steps: 4_000,
        burn_in: 1_500,
        thin: 5,
        ..MHConfig::default()
    };
    StudySettings {
        seeds_per_cell: seeds,
        base_seed: 77,
        fit,
    }
}

#[test]
fn stiffness_units_cancel_in_the_mahalanobis_distance() {
    let plan = SensorPlan {
        seed: 3,
        ..SensorPlan::benchmark(1.0)
    };
    let base = synth_dataset(&bench_spec(), &plan, Truth::Analytic).unwrap();
    // EI and q both ×10³ leave the deflections unchanged
    let kilo = BeamSpec::uniform(1.0, 1e3, 20, Support::CantileverLeft, 1e3);
    let scaled = synth_dataset(&kilo, &plan, Truth::Analytic).unwrap();
    let cfg = quick_settings(1).fit;
    let a = fit(&base.problem, 1.0, &cfg).unwrap().stiffness;
    let b = fit(&scaled.problem, 1e3, &cfg).unwrap().stiffness;
    let (da, db) = (a.mahalanobis().unwrap(), b.mahalanobis().unwrap());
    assert!((da - db).abs() <= 1e-6 * da.max(1e-3), "{da} vs {db}");
    assert!((a.mu_ei - b.mu_ei).abs() <= 1e-9);
}

#[test]
fn reruns_reproduce_every_cell_regardless_of_thread_count() {
    let study = NoiseStudy {
        spec: bench_spec(),
        plan: bench_plan(0),
        snrs: vec![5.0, 20.0],
        points_per_sensor: vec![2, 4],
        truth: Truth::Analytic,
    };
    let settings = quick_settings(2);
    let pool = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let seen = Mutex::new(0);
    let a =
        pool(1).install(|| noise_study(&study, &settings, |_| *seen.lock().unwrap() += 1).unwrap());
    let b = pool(4).install(|| noise_study(&study, &settings, |_| {}).unwrap());
    assert_eq!(a, b);
    assert_eq!(*seen.lock().unwrap(), 4);
    assert_eq!(a.cells.len(), 4);
    let csv = a.to_long_csv();
    assert!(csv.starts_with("snr,n_dp,seed,d_m,mu_ei,sigma_ei\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
    assert_eq!(a.to_summary_csv().lines().count(), 5);
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (k, &i) in idx.iter().enumerate() {
            r[i] = k as f64;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn damage_near_the_support_grows_with_severity() {
    let study = DamageStudy {
        spec: bench_spec(),
        plan: bench_plan(0),
        elements: vec![1],
        reductions: vec![0.1, 0.2, 0.3, 0.4],
    };
    let grid = damage_study(&study, &quick_settings(5), |_| {}).unwrap();
    let medians: Vec<f64> = grid.cells.iter().map(|c| c.median_d_m.unwrap()).collect();
    let rho = spearman(&study.reductions, &medians);
    assert!(rho > 0.0, "medians {medians:?}");
}

#[test]
fn invalid_study_grids_are_rejected() {
    let mut study = DamageStudy {
        spec: bench_spec(),
        plan: bench_plan(0),
        elements: vec![21],
        reductions: vec![0.2],
    };
    assert!(damage_study(&study, &quick_settings(1), |_| {}).is_err());
    study.elements = vec![1];
    study.reductions = vec![1.0];
    assert!(damage_study(&study, &quick_settings(1), |_| {}).is_err());
}
