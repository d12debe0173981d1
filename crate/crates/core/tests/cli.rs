use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confboost"))
        .args(args)
        .env("CONFBOOST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn synth(dir: &Path, n: &str) -> String {
    let p = dir.join("s.csv");
    let o = run(&["synth", "--n", n, "--k", "3", "--seed", "4", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    p.to_str().unwrap().to_string()
}

#[test]
fn bad_flags_exit_with_config_code() {
    assert_eq!(code(&run(&["train", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["train-plain"])), 2);
    assert_eq!(code(&run(&["train-plain", "--dataset", "/no/such.csv"])), 2);
    assert_eq!(code(&run(&["keygen", "--key-bits", "300"])), 2);
}

#[test]
fn secure_training_writes_a_valid_model_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "40");
    let model = dir.path().join("m.json");
    let tr = dir.path().join("t.json");
    let o = run(&[
        "train", "--dataset", &data, "--construction", "secsh-gc", "--tau", "2",
        "--out", model.to_str().unwrap(), "--transcript", tr.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ok = run(&["report", "--input", model.to_str().unwrap(), "--schema", "model"]);
    assert_eq!(code(&ok), 0);
    let ok = run(&["report", "--input", tr.to_str().unwrap(), "--schema", "transcript"]);
    assert_eq!(code(&ok), 0);
    let wrong = run(&["report", "--input", model.to_str().unwrap(), "--schema", "leakage"]);
    assert_eq!(code(&wrong), 4);
}

#[test]
fn dealer_ot_needs_the_insecure_switch() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "20");
    let o = run(&["train", "--dataset", &data, "--tau", "1", "--ot", "dealer"]);
    assert_eq!(code(&o), 2);
    let o = run(&["train", "--dataset", &data, "--tau", "1", "--ot", "dealer", "--insecure"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_values_apply_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "80");
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!("dataset = \"{data}\"\n\n[train-plain]\ntau = 3\nbase = \"ds\"\n"),
    )
    .unwrap();
    let from_file = run(&["--config", cfg.to_str().unwrap(), "train-plain"]);
    assert_eq!(code(&from_file), 0, "{}", String::from_utf8_lossy(&from_file.stderr));
    let m: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(m["kind"], "DS");
    assert_eq!(m["alphas"].as_array().unwrap().len(), 3);

    let flagged = run(&["--config", cfg.to_str().unwrap(), "train-plain", "--tau", "5", "--base", "rlc"]);
    let m: serde_json::Value = serde_json::from_slice(&flagged.stdout).unwrap();
    assert_eq!(m["kind"], "RLC");
    assert_eq!(m["alphas"].as_array().unwrap().len(), 5);
}

#[test]
fn keygen_is_seeded() {
    let a = run(&["keygen", "--seed", "3"]);
    let b = run(&["keygen", "--seed", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
