//! The command-line interface: subcommands, artifacts and exit codes.

use std::fs;
use std::process::{Command, Output};

fn pairtomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairtomo")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_pom_prints_the_check_table() {
    for kind in ["sic", "product"] {
        let o = pairtomo(&["verify-pom", "--kind", kind]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.contains("completeness") && text.contains("duality"));
        assert!(text.contains("overall: PASS"));
    }
}

#[test]
fn export_pom_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sic.json");
    let o = pairtomo(&["export-pom", "--kind", "sic", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(json["outcomes"].as_array().unwrap().len(), 16);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"runs_per_point": "many"}"#).unwrap();
    for args in [
        vec!["verify-pom", "--kind", "tetra"],
        vec!["verify-pom", "--kind", "sic", "--bogus"],
        vec!["frobnicate"],
        vec!["table", "--ensemble", "gaussian"],
        vec!["bell", "--config", missing.to_str().unwrap()],
        vec!["bell", "--config", bad.to_str().unwrap()],
        vec!["bell", "--runs", "0"],
        vec!["run"],
    ] {
        let o = pairtomo(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn bell_writes_curves_fits_and_eta() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(&config, r#"{"n_grid": [250, 500, 1000, 2000]}"#).unwrap();
    let out = dir.path().join("bell");
    let o = pairtomo(&[
        "bell",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "42",
        "--runs",
        "5",
        "--raw",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let points = fs::read_to_string(out.join("fig1_points.csv")).unwrap();
    assert!(points.starts_with("state_label,pom,estimator,N,D_avg,D_sd,runs\n"));
    assert_eq!(points.lines().count(), 1 + 4 * 2 * 2 * 4);
    let fits = fs::read_to_string(out.join("fig1_fits.csv")).unwrap();
    assert!(fits.starts_with("state_label,pom,estimator,a,c,residual_rms\n"));
    let eta = fs::read_to_string(out.join("eta.csv")).unwrap();
    assert!(eta.starts_with("state_label,estimator,eta,n_prod_thr,n_sic_thr,d_thr\n"));
    assert!(eta.contains("rho_0,ml,"));
    let raw = fs::read_to_string(out.join("raw_runs.csv")).unwrap();
    assert!(raw.lines().count() > 1);
    let provenance: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(provenance["config"]["master_seed"], 42);
    assert_eq!(provenance["config"]["runs_per_point"], 5);
}

#[test]
fn table_writes_summary_with_mean_and_sd() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.json");
    fs::write(&config, r#"{"n_grid": [250, 500, 1000], "runs_per_point": 3}"#).unwrap();
    let out = dir.path().join("table");
    let o = pairtomo(&[
        "table",
        "--ensemble",
        "unbiased_mixed",
        "--states",
        "3",
        "--seed",
        "7",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("table_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ensemble"], "unbiased_mixed");
    assert_eq!(summary["n_states"], 3);
    for row in ["product", "sic", "eta"] {
        for col in ["rd", "ml"] {
            assert!(summary["table"][row][col]["mean"].is_number(), "{row}/{col}");
            assert!(summary["table"][row][col]["sd"].is_number(), "{row}/{col}");
        }
    }
}

#[test]
fn run_uses_the_config_file_and_kind_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("single.json");
    fs::write(
        &config,
        r#"{"kind": "bell", "ensemble": {"kind": "pure", "rank": 1}, "n_grid": [250, 500, 1000], "runs_per_point": 2}"#,
    )
    .unwrap();
    let out = dir.path().join("single");
    let o = pairtomo(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--kind",
        "single_state",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let eta = fs::read_to_string(out.join("eta.csv")).unwrap();
    assert_eq!(eta.lines().count(), 1 + 2);
}
