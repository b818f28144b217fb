use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn beamgp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamgp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = beamgp(args, cwd);
    assert!(
        out.status.success(),
        "beamgp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&read(path)).unwrap()
}

/// Short chains for tests that only exercise plumbing.
const QUICK: &str = r#"{"fit": {"mh": {"n_steps": 3000, "burn_in": 1000, "thin": 5}}}"#;

fn quick_config(dir: &Path) -> PathBuf {
    let p = dir.join("quick.json");
    fs::write(&p, QUICK).unwrap();
    p
}

fn files(dir: &Path, except: &[&str]) -> Vec<(String, String)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !except.contains(&p.file_name().unwrap().to_str().unwrap()))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                read(&p),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn synth_writes_benchmark_layout() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--out-dir", "s"], tmp.path());
    let csv = read(tmp.path().join("s/dataset.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|r| r.starts_with("u,")).count(), 20);
    assert_eq!(rows.iter().filter(|r| r.starts_with("q,")).count(), 9);
    let sidecar = read(tmp.path().join("s/dataset.cfg"));
    assert_eq!(sidecar.lines().filter(|l| l.starts_with("bc.")).count(), 4);
    assert!(sidecar.contains("ei_ref="));
    let manifest = json(tmp.path().join("s/manifest.json"));
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["seed"], 0);
}

#[test]
fn noiseless_synth_reproduces_truth() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--snr", "inf", "--out-dir", "s"], tmp.path());
    let truth: Vec<(String, String, String)> = read(tmp.path().join("s/truth.csv"))
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].into(), f[1].into(), f[2].into())
        })
        .collect();
    let data = read(tmp.path().join("s/dataset.csv"));
    let mut checked = 0;
    for line in data.lines().skip(1).filter(|l| l.starts_with("u,")) {
        let f: Vec<&str> = line.split(',').collect();
        let t = truth
            .iter()
            .find(|t| t.0 == "u" && t.1 == f[2])
            .expect("sensor position on truth grid");
        assert_eq!(t.2, f[3]);
        checked += 1;
    }
    assert_eq!(checked, 20);
}

#[test]
fn same_seed_same_files() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--seed", "11", "--out-dir", "a"], tmp.path());
    ok(&["synth", "--seed", "11", "--out-dir", "b"], tmp.path());
    ok(&["synth", "--seed", "12", "--out-dir", "c"], tmp.path());
    assert_eq!(
        files(&tmp.path().join("a"), &[]),
        files(&tmp.path().join("b"), &[])
    );
    assert_ne!(
        read(tmp.path().join("a/dataset.csv")),
        read(tmp.path().join("c/dataset.csv"))
    );
}

#[test]
fn benchmark_fit_recovers_stiffness() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--out-dir", "s"], tmp.path());
    let out = ok(
        &["fit", "--dataset", "s/dataset.csv", "--out-dir", "f"],
        tmp.path(),
    );
    let summary = json(tmp.path().join("f/summary.json"));
    let mu = summary["mu_ei"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&mu), "mu_EI = {mu}");
    assert!(summary["d_m"].as_f64().unwrap() >= 0.0);
    assert_eq!(
        summary["summary"]["correlation"].as_array().unwrap().len(),
        4
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("mu_EI") && text.contains("d_M"));
    let chain = read(tmp.path().join("f/chain.csv"));
    assert!(chain
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("sigma_s,ell,ei,noise:deflection"));
}

#[test]
fn noiseless_fit_is_tight() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--snr", "inf", "--out-dir", "s"], tmp.path());
    ok(
        &["fit", "--dataset", "s/dataset.csv", "--out-dir", "f"],
        tmp.path(),
    );
    let mu = json(tmp.path().join("f/summary.json"))["mu_ei"]
        .as_f64()
        .unwrap();
    assert!((0.99..=1.01).contains(&mu), "mu_EI = {mu}");
}

#[test]
fn out_of_range_location_is_a_parse_failure() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("d.csv"),
        "kind,label,x,value\nu,a,0.5,0.01\nu,a,1.2,0.02\n",
    )
    .unwrap();
    fs::write(tmp.path().join("d.cfg"), "length=1\nei_ref=1\n").unwrap();
    let out = beamgp(&["fit", "--dataset", "d.csv", "--out-dir", "f"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn invalid_start_names_the_bound() {
    let tmp = TempDir::new().unwrap();
    ok(&["synth", "--out-dir", "s"], tmp.path());
    fs::write(
        tmp.path().join("c.json"),
        r#"{"fit": {"ei_prior_bounds": [1.5, 2.0]}}"#,
    )
    .unwrap();
    let out = beamgp(
        &[
            "fit",
            "--config",
            "c.json",
            "--dataset",
            "s/dataset.csv",
            "--out-dir",
            "f",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(5));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("ei") && err.contains("ei_prior_bounds"),
        "{err}"
    );
}

#[test]
fn config_errors_have_their_own_codes() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("broken.json"), "{ not json").unwrap();
    fs::write(tmp.path().join("typo.json"), r#"{"sead": 3}"#).unwrap();
    assert_eq!(
        beamgp(&["synth", "--config", "broken.json"], tmp.path())
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        beamgp(&["synth", "--config", "typo.json"], tmp.path())
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        beamgp(&["synth", "--config", "missing.json"], tmp.path())
            .status
            .code(),
        Some(6)
    );
    assert_eq!(
        beamgp(&["fit", "--out-dir", "f"], tmp.path()).status.code(),
        Some(4)
    );
    assert_eq!(beamgp(&["bogus"], tmp.path()).status.code(), Some(2));
}

/// Synthesizes and fits with short chains; returns the temp dir.
fn fitted() -> TempDir {
    let tmp = TempDir::new().unwrap();
    let cfg = quick_config(tmp.path());
    let cfg = cfg.to_str().unwrap();
    ok(&["synth", "--config", cfg, "--out-dir", "s"], tmp.path());
    ok(
        &[
            "fit",
            "--config",
            cfg,
            "--dataset",
            "s/dataset.csv",
            "--out-dir",
            "f",
        ],
        tmp.path(),
    );
    tmp
}

#[test]
fn predict_writes_one_row_per_grid_point() {
    let tmp = fitted();
    ok(
        &[
            "predict",
            "--dataset",
            "s/dataset.csv",
            "--chain",
            "f/chain.csv",
            "--kinds",
            "u,m",
            "--grid",
            "50",
            "--draws",
            "40",
            "--out-dir",
            "p",
        ],
        tmp.path(),
    );
    for kind in ["u", "m"] {
        let csv = read(tmp.path().join(format!("p/pred_{kind}.csv")));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("kind,x,mean,std"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 50);
        for r in rows {
            let std: f64 = r.split(',').nth(3).unwrap().parse().unwrap();
            assert!(std >= 0.0);
        }
    }
    assert!(!tmp.path().join("p/rmse.csv").exists());
}

#[test]
fn predict_scores_against_truth() {
    let tmp = fitted();
    ok(
        &[
            "predict",
            "--dataset",
            "s/dataset.csv",
            "--chain",
            "f/chain.csv",
            "--kinds",
            "m,v",
            "--draws",
            "40",
            "--truth",
            "s/truth.csv",
            "--out-dir",
            "p",
        ],
        tmp.path(),
    );
    let rmse = read(tmp.path().join("p/rmse.csv"));
    assert_eq!(rmse.lines().count(), 3);
    for line in rmse.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        // m and v are pinned by the known load
        assert!(v < 1e-3, "{line}");
    }
}

#[test]
fn predict_rejects_mismatched_chain() {
    let tmp = fitted();
    let renamed = read(tmp.path().join("s/dataset.csv")).replace(",deflection,", ",dial gauge,");
    fs::write(tmp.path().join("s/renamed.csv"), renamed).unwrap();
    fs::copy(
        tmp.path().join("s/dataset.cfg"),
        tmp.path().join("s/renamed.cfg"),
    )
    .unwrap();
    let out = beamgp(
        &[
            "predict",
            "--dataset",
            "s/renamed.csv",
            "--chain",
            "f/chain.csv",
            "--out-dir",
            "p",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("consistency"));
}

#[test]
fn strain_without_fiber_distance_is_a_config_error() {
    let tmp = fitted();
    let sidecar: String = read(tmp.path().join("s/dataset.cfg"))
        .lines()
        .filter(|l| !l.starts_with("fiber_distance"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(tmp.path().join("s/nofiber.cfg"), sidecar).unwrap();
    let out = beamgp(
        &[
            "predict",
            "--dataset",
            "s/dataset.csv",
            "--problem",
            "s/nofiber.cfg",
            "--chain",
            "f/chain.csv",
            "--kinds",
            "eps",
            "--draws",
            "10",
            "--out-dir",
            "p",
        ],
        tmp.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn manifests_replay_every_command() {
    let tmp = fitted();
    let p = tmp.path();
    ok(
        &[
            "predict",
            "--dataset",
            "s/dataset.csv",
            "--chain",
            "f/chain.csv",
            "--draws",
            "20",
            "--grid",
            "11",
            "--out-dir",
            "p",
        ],
        p,
    );
    fs::write(
        p.join("study.json"),
        r#"{"study": {"seeds_per_cell": 2, "noise": {"snrs": [10, "inf"], "points_per_sensor": [3]}},
            "fit": {"mh": {"n_steps": 1500, "burn_in": 500}}}"#,
    )
    .unwrap();
    ok(
        &[
            "study",
            "noise",
            "--config",
            "study.json",
            "--seed",
            "5",
            "--out-dir",
            "n",
        ],
        p,
    );

    // replay from another working directory
    let elsewhere = TempDir::new().unwrap();
    for (cmd, dir) in [
        ("synth", "s"),
        ("fit", "f"),
        ("predict", "p"),
        ("study", "n"),
    ] {
        let manifest = p.join(dir).join("manifest.json");
        let replay = elsewhere.path().join(dir);
        let mut args = vec![cmd];
        if cmd == "study" {
            args.push("noise");
        }
        let (m, r) = (manifest.to_str().unwrap(), replay.to_str().unwrap());
        args.extend(["--config", m, "--out-dir", r]);
        ok(&args, elsewhere.path());
        assert_eq!(
            files(&p.join(dir), &[]),
            files(&replay, &[]),
            "{cmd} replay differs"
        );
    }
}

#[test]
fn single_cell_noise_study() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"study": {"seeds_per_cell": 1, "noise": {"snrs": [20], "points_per_sensor": [5]}},
            "fit": {"mh": {"n_steps": 1500, "burn_in": 500}}}"#,
    )
    .unwrap();
    ok(
        &["study", "noise", "--config", "c.json", "--out-dir", "n"],
        tmp.path(),
    );
    let summary = read(tmp.path().join("n/noise_summary.csv"));
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("20,5,"));
    assert_eq!(read(tmp.path().join("n/noise_long.csv")).lines().count(), 2);
    assert!(!tmp.path().join("n/noise_long.partial.csv").exists());
}

#[test]
fn damage_study_defaults_cover_every_element() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"study": {"seeds_per_cell": 1}, "fit": {"mh": {"n_steps": 300, "burn_in": 100}}}"#,
    )
    .unwrap();
    ok(
        &["study", "damage", "--config", "c.json", "--out-dir", "d"],
        tmp.path(),
    );
    let summary = read(tmp.path().join("d/damage_summary.csv"));
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 80);
    assert!(rows[0].starts_with("1,0.1,"));
    assert!(rows[79].starts_with("20,0.4,"));
}

#[test]
fn study_output_ignores_thread_count() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"study": {"seeds_per_cell": 2, "damage": {"elements": [1, 10], "reductions": [0.2, 0.4]}},
            "fit": {"mh": {"n_steps": 1000, "burn_in": 300}}}"#,
    )
    .unwrap();
    ok(
        &[
            "study",
            "damage",
            "--config",
            "c.json",
            "--threads",
            "1",
            "--out-dir",
            "one",
        ],
        tmp.path(),
    );
    ok(
        &[
            "study",
            "damage",
            "--config",
            "c.json",
            "--threads",
            "3",
            "--out-dir",
            "three",
        ],
        tmp.path(),
    );
    let skip = ["manifest.json"];
    assert_eq!(
        files(&tmp.path().join("one"), &skip),
        files(&tmp.path().join("three"), &skip)
    );
}
