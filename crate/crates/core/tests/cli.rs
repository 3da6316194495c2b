use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcournot"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const FIG1_MARKET: &str = r#""market": {"n_q": 1, "n_c": 1, "a_q": 10, "a_c": 10, "theta_q": 3, "theta_c": 2,
    "gamma_qq": 2, "gamma_cc": 2, "gamma_qc": 1}"#;

#[test]
fn presets_match_golden_files() {
    let cases = [
        ("sweep-energy", "fig1", "fig1_sweep_energy.csv"),
        ("sweep-ratio", "fig2", "fig2_sweep_ratio.csv"),
        ("sweep-scale", "fig3", "fig3_sweep_scale.csv"),
    ];
    for (cmd, preset, golden) in cases {
        let out = run(&[cmd, "--preset", preset]);
        assert!(
            out.status.success(),
            "{cmd} {preset}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let expected = std::fs::read(manifest_dir().join("tests/golden").join(golden)).unwrap();
        assert!(out.stdout == expected, "{cmd} --preset {preset} differs from {golden}");
    }
}

#[test]
fn threshold_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t.csv");
    let out = run(&["threshold", "--preset", "fig3", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("ion_trap: a* = 1.28"), "{report}");
    let golden = std::fs::read(manifest_dir().join("tests/golden/fig3_threshold.csv")).unwrap();
    assert_eq!(std::fs::read(&target).unwrap(), golden);
}

#[test]
fn shipped_configs_run() {
    for (cmd, cfg) in [
        ("sweep-energy", "fig1.json"),
        ("sweep-ratio", "fig2.json"),
        ("sweep-scale", "fig3.json"),
        ("threshold", "ion_threshold.json"),
        ("sweep-energy", "fig1_best_response.json"),
        ("equilibrium", "fig1_best_response.json"),
    ] {
        let path = manifest_dir().join("configs").join(cfg);
        let out = run(&[cmd, "--config", path.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{cmd} {cfg}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn config_file_equals_preset() {
    let path = manifest_dir().join("configs/fig2.json");
    let a = run(&["sweep-ratio", "--config", path.to_str().unwrap()]);
    let b = run(&["sweep-ratio", "--preset", "fig2"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn equilibrium_report_for_fig1() {
    let out = run(&["equilibrium", "--preset", "fig1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("q_q* = 1.3043478260869565e0  q_c* = 2.1739130434782608e0"),
        "{text}"
    );
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("oracle residual (closed form vs linear solve) "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-10);
}

#[test]
fn decoupled_market_gives_monopoly_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"market": {"n_q": 2, "n_c": 3, "a_q": 12, "a_c": 8, "theta_q": 3, "theta_c": 2,
            "gamma_qq": 0, "gamma_cc": 0, "gamma_qc": 0}}"#,
    );
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("q_q* = 2.0000000000000000e0  q_c* = 2.0000000000000000e0"),
        "{text}"
    );
}

#[test]
fn malformed_config_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\n  \"market\": {\n    \"n_q\": 1,,\n  }\n}");
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");

    let cfg = write_config(
        dir.path(),
        "unknown.json",
        &format!("{{{FIG1_MARKET}, \"plot\": true}}"),
    );
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("plot"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["equilibrium"]).status.code(), Some(2));
    assert_eq!(run(&["plot", "--preset", "fig1"]).status.code(), Some(2));
    assert_eq!(run(&["equilibrium", "--preset", "fig7"]).status.code(), Some(2));
    assert_eq!(
        run(&["equilibrium", "--config", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["sweep-ratio", "--preset", "fig1"]).status.code(), Some(2));
}

#[test]
fn degenerate_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"market": {"n_q": 1, "n_c": 1, "a_q": 10, "a_c": 10, "theta_q": 1, "theta_c": 1,
            "gamma_qq": 2, "gamma_cc": 2, "gamma_qc": 2}}"#,
    );
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate denominator in two-group denominator"));
}

#[test]
fn threshold_without_crossing_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.json",
        r#"{"market": {"n_q": 10, "n_c": 10, "a_q": 1, "a_c": 1, "theta_q": 2, "theta_c": 2,
            "gamma_qq": 2, "gamma_cc": 2, "gamma_qc": 0.1},
            "hardware": {"quantum_kinds": ["rydberg"], "bracket": [100, 1000]}}"#,
    );
    let out = run(&["threshold", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no sign change on [1e2, 1e3]"));
}

#[test]
fn verify_default_and_determinism() {
    let a = run(&["verify"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.contains("all suites pass"));
    let b = run(&["verify", "--seed", "99", "--trials", "40"]);
    let c = run(&["verify", "--seed", "99", "--trials", "40"]);
    assert_eq!(b.stdout, c.stdout);
    assert!(String::from_utf8_lossy(&b.stdout).starts_with("seed 99\n"));
}

#[test]
fn verify_5000_trials_under_ten_seconds() {
    let start = Instant::now();
    let out = run(&["verify", "--trials", "5000"]);
    assert!(out.status.success());
    assert!(start.elapsed() < Duration::from_secs(10), "{:?}", start.elapsed());
}

#[test]
fn energy_sweep_of_200_points_under_a_second() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        &format!(
            r#"{{{FIG1_MARKET},
            "energy": {{"model_q": {{"kind": "log_power", "beta": 1, "exponent": 1}},
                        "model_c": {{"kind": "power_law", "beta": 1, "exponent": 1}}, "mode": "paper_clamp"}},
            "sweep": {{"variable": "cap_E", "grid": {{"spacing": "linear", "start": 0.1, "stop": 4, "points": 200}}}}}}"#
        ),
    );
    let start = Instant::now();
    let out = run(&["sweep-energy", "--config", cfg.to_str().unwrap()]);
    assert!(start.elapsed() < Duration::from_secs(1));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 201);
}

#[test]
fn out_flag_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("fig2.csv");
    let out = run(&["sweep-ratio", "--preset", "fig2", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("20 rows, 10 flagged"));
    let golden = std::fs::read(manifest_dir().join("tests/golden/fig2_sweep_ratio.csv")).unwrap();
    assert_eq!(std::fs::read(&target).unwrap(), golden);

    let path = manifest_dir().join("configs/fig1_best_response.json");
    let out = run(&["sweep-energy", "--config", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 61);
}
