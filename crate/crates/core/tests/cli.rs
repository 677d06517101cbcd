use std::path::Path;
use std::process::{Command, Output};

use tu_consensus::experiment::{ExperimentConfig, PRESETS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tu-consensus"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn preset_run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--preset",
            "paper-sim-4p",
            "--steps",
            "300",
            "-o",
            "res",
        ],
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let res = dir.path().join("res");
    let trace = std::fs::read_to_string(res.join("trace_7.csv")).unwrap();
    assert_eq!(trace.lines().count(), 301);
    assert!(trace.starts_with("t,dist_1,dist_2,dist_3,dist_4,total_dist,"));
    let s = summary(&res);
    assert_eq!(s["steps"], 300);
    assert_eq!(s["mode"], "cooperative");
    assert_eq!(s["runs"][0]["seed"], 7);
    assert!(text(&out.stdout).contains("seed    7"));
}

#[test]
fn mode_flag_without_config_picks_a_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--mode",
            "adversarial",
            "--seeds",
            "1..3",
            "--steps",
            "200",
        ],
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let res = dir.path().join("out");
    for seed in 1..=3 {
        assert!(res.join(format!("trace_{seed}.csv")).is_file());
    }
    let s = summary(&res);
    assert_eq!(s["mode"], "adversarial");
    assert_eq!(s["aggregate"]["runs"], 3);
}

#[test]
fn adversarial_seed_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--preset",
            "adversarial-2x2",
            "--seeds",
            "5..8",
            "--steps",
            "600",
            "-o",
            "sweep",
        ],
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let res = dir.path().join("sweep");
    let s = summary(&res);
    let runs = s["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for (run, seed) in runs.iter().zip(5..) {
        assert_eq!(run["seed"], seed);
        assert!(res.join(run["trace_file"].as_str().unwrap()).is_file());
        assert!(run["checkpoint_distances"]["500"].as_f64().unwrap() >= 0.0);
    }
    let median = s["aggregate"]["median_checkpoint_distances"]["500"]
        .as_f64()
        .unwrap();
    assert!(median < 0.5);
    assert!(text(&out.stdout).contains("median total_dist at t=500"));
}

#[test]
fn empty_core_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "game": {"n": 2, "coalitions": [
            {"members": [1], "value": 1.0},
            {"members": [2], "value": 1.0}
        ], "grand_value": 1.0},
        "schedule": {"topology": "path"},
        "policy": {"core_approach": {}},
        "steps": 100
    }"#;
    std::fs::write(dir.path().join("empty.json"), cfg).unwrap();
    let out = run_in(dir.path(), &["run", "--config", "empty.json"]);
    assert!(!out.status.success());
    assert!(
        text(&out.stderr).contains("core is empty"),
        "{}",
        text(&out.stderr)
    );
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_field_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "target": {"dim": 2, "ineq_rows": []},
        "players": 2,
        "schedule": {"topology": "path", "edges_per_stp": 2},
        "policy": {"core_approach": {}},
        "steps": 10
    }"#;
    std::fs::write(dir.path().join("typo.json"), cfg).unwrap();
    let out = run_in(dir.path(), &["run", "--config", "typo.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(
        err.contains("schedule") && err.contains("edges_per_stp"),
        "{err}"
    );
}

#[test]
fn validate_only_reports_disconnected_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "game": {"n": 4, "coalitions": [], "grand_value": 4.0},
        "schedule": {"mode": "explicit", "phases": [[[1, 2]], [[3, 4]]]},
        "policy": {"core_approach": {}},
        "steps": 100
    }"#;
    std::fs::write(dir.path().join("split.json"), cfg).unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--config", "split.json", "--validate-only"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(
        stdout
            .lines()
            .any(|l| l.starts_with("FAIL") && l.contains("connectivity")),
        "{stdout}"
    );
    assert!(!dir.path().join("out").exists());

    let ok = run_in(
        dir.path(),
        &["run", "--preset", "paper-sim-4p", "--validate-only"],
    );
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn adversarial_mode_needs_an_adversarial_policy() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["run", "--preset", "paper-sim-4p", "--mode", "adversarial"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("adversarial"));
}

#[test]
fn shipped_configs_match_presets() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in PRESETS {
        let path = root.join(format!("{name}.json"));
        let preset = ExperimentConfig::preset(name).unwrap();
        if std::env::var_os("BLESS_CONFIGS").is_some() {
            std::fs::create_dir_all(&root).unwrap();
            std::fs::write(&path, preset.to_json() + "\n").unwrap();
        }
        let mut shipped = ExperimentConfig::from_file(&path).unwrap();
        shipped.base_dir = preset.base_dir.clone();
        assert_eq!(shipped, preset, "{name}");
    }
}

#[test]
fn shipped_config_runs_from_another_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/paper-sim-4p.json");
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--steps",
            "50",
            "--seed",
            "2",
        ],
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(dir.path().join("out/trace_2.csv").is_file());
}
