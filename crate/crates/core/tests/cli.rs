//! End-to-end runs of the `pancake` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pancake_stack::io::{read_trace, RunConfig};
use serde_json::Value;
use tempfile::tempdir;

fn pancake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pancake"))
        .args(args)
        .env_remove("PANCAKE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_the_initial_curve_and_a_manifest() {
    let dir = tempdir().unwrap();
    let o = pancake(&["gen", "--preset", "stack-desk", "--out", p(dir.path()), "--m", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("initial.csv")).unwrap();
    assert!(csv.starts_with("x,r\n"));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert!(manifest["config_hash"].as_str().unwrap().len() == 64);
    let echo = fs::read_to_string(dir.path().join("config.json")).unwrap();
    RunConfig::from_json(&echo, "echo").unwrap();

    let again = tempdir().unwrap();
    pancake(&["gen", "--preset", "stack-desk", "--out", p(again.path()), "--m", "3"]);
    assert_eq!(csv, fs::read_to_string(again.path().join("initial.csv")).unwrap());
}

#[test]
fn evolve_then_diagnose_from_the_trace() {
    let dir = tempdir().unwrap();
    let run = dir.path().join("run");
    let o = pancake(&["evolve", "--preset", "dumbbell", "--out", p(&run)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = read_trace(&run).unwrap();
    assert!(trace.snapshots.len() > 2);

    let diag = dir.path().join("diag");
    let o = pancake(&["diagnose", "--preset", "dumbbell", "--out", p(&diag), "--trace", p(&run)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(diag.join("diagnostics.json").is_file());
    assert!(diag.join("series.csv").is_file());
}

#[test]
fn usage_problems_exit_with_two() {
    let dir = tempdir().unwrap();
    let out = p(dir.path());
    assert_eq!(code(&pancake(&["gen", "--out", out])), 2);
    assert_eq!(code(&pancake(&["gen", "--preset", "torus", "--out", out])), 2);
    assert_eq!(code(&pancake(&["frobnicate"])), 2);

    let bad = dir.path().join("bad.json");
    let mut cfg: Value = serde_json::to_value(pancake_stack::presets::preset("sphere").unwrap()).unwrap();
    cfg["schedule"]["s"] = serde_json::json!([-1.0, -0.5]);
    fs::write(&bad, cfg.to_string()).unwrap();
    let o = pancake(&["gen", "--config", p(&bad), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decreasing"));

    let seeded = dir.path().join("seeded.json");
    let mut cfg: Value = serde_json::to_value(pancake_stack::presets::preset("sphere").unwrap()).unwrap();
    cfg["random_seed"] = serde_json::json!(7);
    fs::write(&seeded, cfg.to_string()).unwrap();
    let o = pancake(&["gen", "--config", p(&seeded), "--out", out, "--seedless"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mentions a seed"));
}

#[test]
fn unwritable_output_exits_with_one() {
    let dir = tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = pancake(&["gen", "--preset", "sphere", "--out", p(&blocker.join("sub"))]);
    assert_eq!(code(&o), 1);
}
