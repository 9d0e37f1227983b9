//! End-to-end command tests against the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_edsvm")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("edsvm-cli-test-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(
        &path,
        r#"{
  "grid": {
    "c_values": [0.5, 2.0],
    "omega_values": [0.4, 0.8],
    "a_values": [-1.0],
    "gamma_values": [0.5],
    "folds": 3,
    "seed": 0
  },
  "bayes-mc-samples": 20000,
  "grid-resolution": 25
}"#,
    )
    .unwrap();
    path
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn assert_ok(out: &std::process::Output) {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Small two-moon-ish CSV written by hand for fit/predict tests.
fn write_dataset(path: &Path) {
    let mut text = String::from("x1,x2,label\n");
    for i in 0..20 {
        let t = i as f64 / 5.0;
        text.push_str(&format!("{},{},1\n", 1.0 + t * 0.3, 0.5 - t * 0.1));
        text.push_str(&format!("{},{},-1\n", -1.0 - t * 0.2, -0.4 + t * 0.15));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn fit_predict_round_trip_matches_in_memory_decisions() {
    let dir = workdir("roundtrip");
    let data = dir.join("data.csv");
    write_dataset(&data);
    let model = dir.join("model.json");

    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--model",
        "c-edsvm",
        "--C",
        "1.0",
        "--omega",
        "0.5",
        "--kernel",
        "rbf",
        "--gamma",
        "0.5",
        "--targets",
        "mean",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_ok(&out);

    let scores = dir.join("scores.csv");
    let out = run(&[
        "predict",
        "--model-file",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        scores.to_str().unwrap(),
    ]);
    assert_ok(&out);

    // Reload the model in-process and compare decision values to 1e-9.
    let file: edsvm_core::model::ModelFile =
        serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let reloaded = file.into_model().unwrap();
    let csv = fs::read_to_string(&scores).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "score,prediction");
    let scored: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse::<f64>().unwrap())
        .collect();

    let mut rows = Vec::new();
    for line in fs::read_to_string(&data).unwrap().lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        rows.push(vec![f[0], f[1]]);
    }
    let queries = edsvm_core::Matrix::from_rows(&rows).unwrap();
    let expected = reloaded.decision_values(&queries).unwrap();
    assert_eq!(scored.len(), expected.len());
    for (s, e) in scored.iter().zip(&expected) {
        assert!((s - e).abs() <= 1e-9, "{s} vs {e}");
    }
}

#[test]
fn predict_accepts_unlabeled_csv() {
    let dir = workdir("unlabeled");
    let data = dir.join("data.csv");
    write_dataset(&data);
    let model = dir.join("model.json");
    let out = run(&[
        "fit", "--data", data.to_str().unwrap(), "--model", "c-svm",
        "--C", "1.0", "--kernel", "linear", "--out", model.to_str().unwrap(),
    ]);
    assert_ok(&out);
    // Same points, no label column.
    let unlabeled = dir.join("query.csv");
    fs::write(&unlabeled, "x1,x2\n1.3,0.4\n-1.2,-0.1\n").unwrap();
    let scores = dir.join("scores.csv");
    let out = run(&[
        "predict", "--model-file", model.to_str().unwrap(),
        "--data", unlabeled.to_str().unwrap(), "--out", scores.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let csv = fs::read_to_string(&scores).unwrap();
    let preds: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(preds, vec![1.0, -1.0]);
}

#[test]
fn diagnose_self_benchmark_has_zero_ratio() {
    let dir = workdir("diagnose");
    let data = dir.join("data.csv");
    write_dataset(&data);
    let report = dir.join("diag.json");
    // targets = linex with the C-SVM reference would not be exact; instead
    // check the structural contract: ratio present, recommendation matches
    // the ratio threshold.
    let out = run(&[
        "diagnose",
        "--data",
        data.to_str().unwrap(),
        "--C",
        "1.0",
        "--kernel",
        "linear",
        "--omega",
        "0.5",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let ratio = doc["diagnostics"]["ratio"].as_f64().unwrap();
    let rec = doc["recommendation"].as_str().unwrap();
    if ratio < 1.0 {
        assert!(rec.contains("small omega"));
    } else {
        assert!(rec.contains("near 1"));
    }
    assert!(doc["calibration"]["threshold"].as_f64().unwrap() > 1.0);
}

#[test]
fn simulate_is_byte_deterministic_and_omega_one_duplicates_baselines() {
    let dir = workdir("simulate");
    let config = tiny_config(&dir);
    let out1 = dir.join("a");
    let out2 = dir.join("b");
    for out in [&out1, &out2] {
        let res = run(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "3",
            "--kernel",
            "rbf",
            "--gamma",
            "0.5",
            "--targets",
            "max",
            "--omega",
            "1.0",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_ok(&res);
    }
    for entry in fs::read_dir(&out1).unwrap() {
        let name = entry.unwrap().file_name();
        let a = fs::read(out1.join(&name)).unwrap();
        let b = fs::read(out2.join(&name)).unwrap();
        assert_eq!(a, b, "file {name:?} differs between identical runs");
    }

    // omega = 1 reduces both elite-driven rows to their plain counterparts.
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("report.json")).unwrap()).unwrap();
    let baselines = doc["simulation"]["baselines"].as_array().unwrap();
    let block = &doc["simulation"]["blocks"][0];
    assert_eq!(block["targets"], "max");
    let baseline_metric = |family: &str| -> serde_json::Value {
        baselines
            .iter()
            .find(|o| o["family"] == family)
            .unwrap_or_else(|| panic!("missing {family}"))["summary"]["mean"]
            .clone()
    };
    let block_metric = |family: &str| -> serde_json::Value {
        block["outcomes"]
            .as_array()
            .unwrap()
            .iter()
            .find(|o| o["family"] == family)
            .unwrap_or_else(|| panic!("missing {family}"))["summary"]["mean"]
            .clone()
    };
    assert_eq!(baseline_metric("Csvm"), block_metric("Cedsvm"));
    assert_eq!(baseline_metric("Lssvm"), block_metric("Lsedsvm"));
}

#[test]
fn standardized_fit_applies_the_scaler_at_predict_time() {
    let dir = workdir("stdfit");
    let data = dir.join("data.csv");
    // Features on wildly different scales; separability is only linear
    // after standardization-insensitive fitting, so the saved scaler must
    // travel with the model.
    let mut text = String::from("x1,x2,label\n");
    for i in 0..15 {
        text.push_str(&format!("{},{},1\n", 1000.0 + i as f64 * 40.0, 0.001 * i as f64));
        text.push_str(&format!("{},{},-1\n", -950.0 - i as f64 * 40.0, -0.001 * i as f64));
    }
    fs::write(&data, text).unwrap();
    let model = dir.join("model.json");
    let out = run(&[
        "fit", "--data", data.to_str().unwrap(), "--model", "c-svm", "--C", "1.0",
        "--kernel", "rbf", "--gamma", "0.5", "--standardize", "true",
        "--out", model.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert!(doc["standardizer"].is_object(), "scaler must be persisted");

    let scores = dir.join("scores.csv");
    let out = run(&[
        "predict", "--model-file", model.to_str().unwrap(),
        "--data", data.to_str().unwrap(), "--out", scores.to_str().unwrap(),
    ]);
    assert_ok(&out);
    // With the scaler applied, the RBF fit separates the training data.
    let csv = fs::read_to_string(&scores).unwrap();
    for (k, line) in csv.lines().skip(1).enumerate() {
        let pred: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(pred, expected, "row {k}");
    }
}

#[test]
fn cv_on_credit_scale_csv_emits_all_metrics_for_all_models() {
    let dir = workdir("cvcredit");
    let data = edsvm_harness::instances::credit_shaped_dataset(3);
    let mut text = String::from(
        "a1,a2,a3,a4,a5,a6,a7,a8,a9,a10,a11,a12,a13,a14,label\n",
    );
    for i in 0..data.len() {
        for j in 0..data.dim() {
            text.push_str(&format!("{},", data.features().get(i, j)));
        }
        text.push_str(&format!("{}\n", data.labels()[i]));
    }
    let csv = dir.join("credit.csv");
    fs::write(&csv, text).unwrap();
    let config = dir.join("grid.json");
    fs::write(
        &config,
        r#"{"grid": {"c_values": [1.0], "omega_values": [0.5], "a_values": [-1.0], "gamma_values": [0.5], "folds": 5, "seed": 0}}"#,
    )
    .unwrap();
    let out = run(&[
        "cv",
        "--data",
        csv.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--kernel",
        "linear",
        "--out",
        dir.join("cv").to_str().unwrap(),
    ]);
    assert_ok(&out);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("cv/report.json")).unwrap()).unwrap();
    let outcomes = doc["outcomes"].as_array().unwrap();
    assert_eq!(outcomes.len(), 5, "five model families expected");
    for o in outcomes {
        let mean = &o["summary"]["mean"];
        for metric in [
            "accuracy", "sensitivity", "specificity", "precision", "f1", "roc_auc", "pr_auc",
        ] {
            assert!(mean[metric].is_number(), "missing {metric} for {}", o["family"]);
        }
    }
}

#[test]
fn bad_inputs_exit_with_config_code() {
    let dir = workdir("badinput");
    let data = dir.join("data.csv");
    fs::write(&data, "x1,label\n1.0,2\n-1.0,-1\n").unwrap();
    let out = run(&["fit", "--data", data.to_str().unwrap(), "--model", "c-svm", "--kernel", "linear"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["fit", "--data", "/nonexistent.csv", "--model", "c-svm", "--kernel", "linear"]);
    assert!(!out.status.success());

    // 0/1 labels pass with the explicit mapping flag.
    let data01 = dir.join("data01.csv");
    let mut text = String::from("x1,label\n");
    for i in 0..10 {
        text.push_str(&format!("{},1\n", 1.0 + i as f64 * 0.1));
        text.push_str(&format!("{},0\n", -1.0 - i as f64 * 0.1));
    }
    fs::write(&data01, text).unwrap();
    let model = dir.join("m.json");
    let out = run(&[
        "fit",
        "--data",
        data01.to_str().unwrap(),
        "--model",
        "c-svm",
        "--kernel",
        "linear",
        "--map01",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_ok(&out);
}
