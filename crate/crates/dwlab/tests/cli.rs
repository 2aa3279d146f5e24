//! Black-box tests of the `dwlab` binary: exit codes, emitted artifacts,
//! config handling, and run-to-run determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn dwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dwlab-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn classify_reports_class_and_fixed_points() {
    let out = dwlab(&["classify", "mobius(3,1,1,3)"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("boundary Denjoy-Wolff"));
    assert!(text.contains("denjoy_wolff: 1 (boundary)"));

    let out = dwlab(&["classify", "affine(0.5,0.25)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("interior Denjoy-Wolff"));
}

#[test]
fn classify_parse_error_exits_2() {
    assert_eq!(dwlab(&["classify", "garbage("]).status.code(), Some(2));
    assert_eq!(dwlab(&["classify", "frobnicate(1)"]).status.code(), Some(2));
}

#[test]
fn simulate_exit_codes_follow_verdict() {
    let out = dwlab(&[
        "simulate",
        "--schedule",
        "const(affine(0.5,0))",
        "--max-n",
        "300",
    ]);
    assert_eq!(out.status.code(), Some(0), "constant limit should exit 0");
    assert!(stdout(&out).contains("\"verdict\": \"constant_limit\""));

    let out = dwlab(&[
        "simulate",
        "--schedule",
        "harmonic_rotation",
        "--max-n",
        "5000",
    ]);
    assert_eq!(out.status.code(), Some(4), "divergent should exit 4");

    // Sample points outside the model escape immediately.
    let out = dwlab(&[
        "simulate",
        "--schedule",
        "const(affine(0.5,0))",
        "--points",
        "3,4",
        "--max-n",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(6), "escape should exit 6");

    // Bad schedule expression is a parse error.
    let out = dwlab(&["simulate", "--schedule", "nonsense(1,2)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_and_reparseable_report() {
    let dir = temp_dir("sim");
    let out = dwlab(&[
        "simulate",
        "--schedule",
        "const(affine(0.5,0))",
        "--max-n",
        "100",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "n,point_index,re,im");
    assert!(csv.lines().count() > 100);

    // The embedded config reparses to an equivalent RunConfig.
    let report = fs::read_to_string(dir.join("report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    let cfg_json = value["config"].to_string();
    let cfg = dwlab::cli::RunConfig::from_json(&cfg_json).unwrap();
    let again = dwlab::cli::RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.max_n, 100);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_accepts_toml_config() {
    let dir = temp_dir("cfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("run.toml");
    fs::write(
        &cfg_path,
        "schedule = \"const(affine(0.5,0))\"\nmax_n = 200\npoints = [\"0\", \"0.3+0.2i\"]\n",
    )
    .unwrap();
    let out = dwlab(&["simulate", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"steps\": 200"));

    // Flags override the file.
    let out = dwlab(&[
        "simulate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--max-n",
        "50",
    ]);
    assert!(stdout(&out).contains("\"steps\": 50"));

    // Unknown keys are config errors.
    fs::write(&cfg_path, "schedule = \"harmonic_rotation\"\nbogus = 1\n").unwrap();
    let out = dwlab(&["simulate", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_single_scenario_and_unknown_id() {
    let out = dwlab(&["verify", "thmB", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("thmB"));
    assert!(stdout(&out).contains("PASS"));

    assert_eq!(dwlab(&["verify", "nosuch"]).status.code(), Some(2));
}

#[test]
fn verify_all_is_deterministic_and_writes_results() {
    let dir = temp_dir("verify");
    let a = dwlab(&["verify", "all", "--seed", "42", "--out", dir.to_str().unwrap()]);
    let b = dwlab(&["verify", "all", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "repeated runs must be byte-identical");

    let results = fs::read_to_string(dir.join("results.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&results).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 9);
    for r in parsed.as_array().unwrap() {
        assert_eq!(r["pass"], true, "scenario {} failed", r["id"]);
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_emits_csv_and_handles_empty_grid() {
    let out = dwlab(&["sweep", "--values", "0.0,0.1", "--max-n", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,verdict,limit_re,limit_im,deviation_sum"
    );
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("0.1,divergent"));

    // Empty grid: header only.
    let out = dwlab(&["sweep", "--values", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn sweep_verdicts_do_not_depend_on_seed() {
    let a = dwlab(&["sweep", "--values", "0.05,0.2", "--max-n", "2000", "--seed", "1"]);
    let b = dwlab(&["sweep", "--values", "0.05,0.2", "--max-n", "2000", "--seed", "99"]);
    assert_eq!(stdout(&a), stdout(&b));
}
