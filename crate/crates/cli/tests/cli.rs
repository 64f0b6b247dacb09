use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn ctxpolarity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctxpolarity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config_arg() -> String {
    fixtures().join("pipeline.json").display().to_string()
}

fn run_all_into(dir: &std::path::Path) -> Output {
    ctxpolarity(&["--config", &config_arg(), "run-all", "--output-dir", dir.to_str().unwrap()])
}

#[test]
fn run_all_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_all_into(dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ctxpolarity::pipeline::ARTIFACTS {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Accuracy"), "{stdout}");
}

#[test]
fn missing_input_exits_2_and_names_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let config = serde_json::json!({
        "corpus": fx.join("worked_examples.jsonl"),
        "lexicon": fx.join("lexicon.tsv"),
        "edges": fx.join("edges.tsv"),
        "embeddings": dir.path().join("nowhere.vec"),
        "output_dir": dir.path().join("out"),
    });
    let config_path = dir.path().join("config.json");
    fs::write(&config_path, config.to_string()).unwrap();
    let out = ctxpolarity(&["--config", config_path.to_str().unwrap(), "run-all"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.vec"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_threshold_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctxpolarity(&[
        "--config",
        &config_arg(),
        "run-all",
        "--output-dir",
        dir.path().to_str().unwrap(),
        "--threshold",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold"));
}

#[test]
fn classify_resolves_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_all_into(dir.path()).status.success());
    let out = ctxpolarity(&[
        "classify",
        "--model",
        dir.path().join("model.json").to_str().unwrap(),
        "--sentence",
        "Save your money and go for a better device.",
        "--concept",
        "better_device",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("negative\t"), "{stdout}");
}

#[test]
fn predict_writes_one_line_per_input() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_all_into(dir.path()).status.success());
    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        "{\"id\":\"a\",\"text\":\"I doubt you'd be disappointed.\"}\n{\"id\":\"b\",\"text\":\"Terrible, awful scam.\"}\n",
    )
    .unwrap();
    let out = ctxpolarity(&[
        "predict",
        "--model",
        dir.path().join("model.json").to_str().unwrap(),
        "--in",
        input.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "a");
    assert!(["positive", "negative"].contains(&lines[1]["polarity"].as_str().unwrap()));
}

#[test]
fn evaluate_writes_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = ctxpolarity(&[
        "--config",
        &config_arg(),
        "evaluate",
        "--configs",
        "bow,boc_cs",
        "--folds",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 2);
    assert_eq!(json["folds"], 3);
    assert!(dir.path().join("report.txt").is_file());
}

#[test]
fn unknown_feature_mode_is_a_usage_error() {
    let out = ctxpolarity(&["evaluate", "--configs", "bag_of_magic"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bag_of_magic"));
}

#[test]
fn version_flag() {
    let out = ctxpolarity(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ctxpolarity "));
}
