use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn srfe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srfe"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// 52 rows, seven inputs and one output, like a small engineering dataset.
fn hyshot_like(dir: &Path) -> PathBuf {
    let mut s = String::from("x0,x1,x2,x3,x4,x5,x6,pressure\n");
    for r in 0..52 {
        let x: Vec<f64> = (0..7)
            .map(|j| ((r * 7 + j * 13) as f64 * 0.731).sin())
            .collect();
        let y = x[0].sin() + 0.5 * x[1] * x[2] + 0.1 * x[6];
        let cells: Vec<String> = x
            .iter()
            .chain([y].iter())
            .map(|v| format!("{v:.9}"))
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    let p = dir.join("data.csv");
    fs::write(&p, s).unwrap();
    p
}

const FIT_CONFIG: &str = r#"{
  "sampling": {"dim": 7, "n_per_subset": 30, "sigma": 1.0, "q": 2,
               "bias_range": [0.0, 6.283185307179586], "seed": 11, "scheme": "complete"},
  "activation": "sine",
  "eta": 0.01
}"#;

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    hyshot_like(dir.path());
    fs::write(dir.path().join("fit.json"), FIT_CONFIG).unwrap();
    dir
}

fn column(csv: &str) -> Vec<f64> {
    csv.lines().skip(1).map(|l| l.parse().unwrap()).collect()
}

#[test]
fn fit_then_predict_reproduces_fitted_values() {
    let dir = setup();
    let d = dir.path();
    ok(&srfe(
        &["fit", "--config", "fit.json", "data.csv", "--out", "run"],
        d,
    ));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("run/report.json")).unwrap()).unwrap();
    assert_eq!(report["n_points"], 52);
    assert!(report["train_error"].as_f64().unwrap() < 0.05);
    let fitted: Vec<f64> = report["fitted"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();

    ok(&srfe(
        &[
            "predict",
            "--model",
            "run/model.json",
            "data.csv",
            "--out",
            "pred.csv",
        ],
        d,
    ));
    let pred = column(&fs::read_to_string(d.join("pred.csv")).unwrap());
    assert_eq!(pred.len(), 52);
    for (a, b) in pred.iter().zip(&fitted) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup();
    let d = dir.path();
    ok(&srfe(
        &["fit", "--config", "fit.json", "data.csv", "--out", "a"],
        d,
    ));
    ok(&srfe(
        &["fit", "--config", "fit.json", "data.csv", "--out", "b"],
        d,
    ));
    for f in ["model.json", "report.json"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap()
        );
    }
    ok(&srfe(
        &[
            "fit", "--config", "fit.json", "data.csv", "--seed", "12", "--out", "c",
        ],
        d,
    ));
    assert_ne!(
        fs::read(d.join("a/model.json")).unwrap(),
        fs::read(d.join("c/model.json")).unwrap()
    );
}

#[test]
fn missing_target_column_is_a_data_error() {
    let dir = setup();
    let out = srfe(
        &[
            "fit",
            "--config",
            "fit.json",
            "data.csv",
            "--target-col",
            "temperature",
            "--out",
            "x",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("temperature"));
    assert!(!dir.path().join("x/model.json").exists());
}

#[test]
fn named_target_column() {
    let dir = setup();
    ok(&srfe(
        &[
            "fit",
            "--config",
            "fit.json",
            "data.csv",
            "--target-col",
            "pressure",
            "--out",
            "x",
        ],
        dir.path(),
    ));
}

#[test]
fn malformed_cells_name_their_location() {
    let dir = setup();
    let d = dir.path();
    let text = fs::read_to_string(d.join("data.csv"))
        .unwrap()
        .replacen("\n0", "\nabc", 1);
    fs::write(d.join("bad.csv"), text).unwrap();
    let out = srfe(&["fit", "--config", "fit.json", "bad.csv", "--out", "x"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn empty_points_file_gives_header_only() {
    let dir = setup();
    let d = dir.path();
    ok(&srfe(
        &["fit", "--config", "fit.json", "data.csv", "--out", "run"],
        d,
    ));
    fs::write(d.join("empty.csv"), "x0,x1,x2,x3,x4,x5,x6\n").unwrap();
    let out = srfe(&["predict", "--model", "run/model.json", "empty.csv"], d);
    ok(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "prediction\n");
}

#[test]
fn zero_targets_give_an_all_zero_model() {
    let dir = setup();
    let d = dir.path();
    let text: String = fs::read_to_string(d.join("data.csv"))
        .unwrap()
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                format!("{l}\n")
            } else {
                format!("{},0\n", l.rsplit_once(',').unwrap().0)
            }
        })
        .collect();
    fs::write(d.join("zero.csv"), text).unwrap();
    ok(&srfe(
        &["fit", "--config", "fit.json", "zero.csv", "--out", "z"],
        d,
    ));
    ok(&srfe(
        &[
            "predict",
            "--model",
            "z/model.json",
            "zero.csv",
            "--out",
            "p.csv",
        ],
        d,
    ));
    assert!(column(&fs::read_to_string(d.join("p.csv")).unwrap())
        .iter()
        .all(|&v| v == 0.0));
}

#[test]
fn dimension_mismatch_is_rejected() {
    let dir = setup();
    let d = dir.path();
    fs::write(
        d.join("fit3.json"),
        FIT_CONFIG.replace("\"dim\": 7", "\"dim\": 3"),
    )
    .unwrap();
    assert_eq!(
        srfe(
            &["fit", "--config", "fit3.json", "data.csv", "--out", "x"],
            d
        )
        .status
        .code(),
        Some(2)
    );
}

const DIAGNOSE: &str = r#"{"params": {"gamma": 1.0, "sigma": 1.0, "d": 5, "q": 2, "s": 1,
  "n_features": 1000, "m": 200, "delta": 0.1, "epsilon": 0.1}}"#;

#[test]
fn diagnose_prints_the_coherence_threshold() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("d.json"), DIAGNOSE).unwrap();
    let out = srfe(&["diagnose", "--config", "d.json"], d);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mu = v["bounds"]["coherence_threshold"].as_f64().unwrap();
    assert!((mu - 0.6247).abs() < 5e-5);
}

#[test]
fn diagnose_rejects_bad_delta() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(
        d.join("d.json"),
        DIAGNOSE.replace("0.1, \"epsilon\"", "1.5, \"epsilon\""),
    )
    .unwrap();
    let out = srfe(&["diagnose", "--config", "d.json"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        srfe(&["experiment", "table9"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        srfe(&["experiment", "table1-nothing"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

const EXPERIMENT: &str = r#"{
  "name": "runge small", "target": "runge", "m": 60,
  "fit": {"sampling": {"dim": 1, "n_features": 60, "sigma": 10.0, "seed": 0, "scheme": "dense",
                       "bias_range": [0.0, 6.283185307179586]},
          "activation": "sine", "eta": 0.01},
  "seeds": [0, 1], "baselines": ["ols"], "curve": true,
  "test": {"kind": "grid", "lo": -1.0, "hi": 1.0, "n": 50}
}"#;

#[test]
fn experiment_files_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("e.json"), EXPERIMENT).unwrap();
    ok(&srfe(
        &["experiment", "--config", "e.json", "--out", "a"],
        d,
    ));
    ok(&srfe(
        &[
            "experiment",
            "--config",
            "e.json",
            "--out",
            "b",
            "--jobs",
            "2",
        ],
        d,
    ));
    let curve = fs::read_to_string(d.join("a/runge_small.csv")).unwrap();
    assert!(curve.starts_with("x,f,srfe,ols\n"));
    assert_eq!(curve.lines().count(), 51);
    assert_eq!(
        fs::read(d.join("a/summary.csv")).unwrap(),
        fs::read(d.join("b/summary.csv")).unwrap()
    );
    let strip = |p: &str| {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(d.join(p)).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_clock_seconds");
        v
    };
    assert_eq!(strip("a/runge_small.json"), strip("b/runge_small.json"));
}
