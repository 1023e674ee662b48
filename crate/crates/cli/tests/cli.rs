//! End-to-end tests of the binary: artifact layout, determinism, the
//! exit-status contract, and config-file override semantics.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bayule"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn enumerate_two_vertices_matches_exact_thirds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "enumerate",
        "--m",
        "1",
        "--n",
        "2",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("enumerate.csv"));
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "sequence,numerator,denominator,probability");
    assert_eq!(rows[1], "2;2,1,3,0.3333333333333333");
    assert_eq!(rows[2], "3;1,2,3,0.6666666666666666");
    assert!(csv.starts_with("# {"), "config line embedded: {csv}");
}

#[test]
fn artifacts_embed_resolved_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate-ba",
        "--m",
        "2",
        "--n",
        "100",
        "--seed",
        "42",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("ba_summary.json"))).unwrap();
    assert_eq!(report["command"], "simulate-ba");
    assert_eq!(report["seed"], 42);
    assert_eq!(report["params"]["m"], 2);
    assert_eq!(report["params"]["n"], 100);
    assert_eq!(report["results"]["vertices"], 100);
    let csv = read(&dir.path().join("ba_degree_histogram.csv"));
    let header: serde_json::Value =
        serde_json::from_str(csv.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(header["seed"], 42);
}

#[test]
fn fixed_seed_runs_are_byte_identical_and_parallelism_invariant() {
    let args = |dir: &Path, par: &str| {
        vec![
            "verify-planted".to_string(),
            "--i".into(),
            "4".into(),
            "--n".into(),
            "24".into(),
            "--replicas".into(),
            "1500".into(),
            "--seed".into(),
            "11".into(),
            "--lineage-tol".into(),
            "0.2".into(),
            "--vertex-tol".into(),
            "0.1".into(),
            "--parallelism".into(),
            par.into(),
            "--output".into(),
            dir.to_str().unwrap().into(),
        ]
    };
    let (d1, d2, d8) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    for (dir, par) in [(&d1, "1"), (&d2, "1"), (&d8, "8")] {
        let out = bin().args(args(dir.path(), par)).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    // same seed, same parallelism: artifacts agree byte for byte
    for name in ["planted_records.csv", "planted_report.json"] {
        assert_eq!(
            read(&d1.path().join(name)),
            read(&d2.path().join(name)),
            "{name} differs between identical runs"
        );
    }
    // different parallelism: per-replica records still identical
    let rows1 = read(&d1.path().join("planted_records.csv"));
    let rows8 = read(&d8.path().join("planted_records.csv"));
    assert_eq!(data_rows(&rows1), data_rows(&rows8));
}

#[test]
fn exit_codes_follow_the_contract() {
    // 0: help
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    // 1: unknown flag, with a diagnostic on stderr
    let out = run(&["enumerate", "--m", "1", "--n", "2", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    // 1: parameters a module rejects
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "enumerate",
        "--m",
        "0",
        "--n",
        "2",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // 2: a verification that ran and failed, named on stderr
    let out = run(&[
        "verify-limit-degree",
        "--m",
        "1",
        "--n",
        "2000",
        "--tol",
        "0.000001",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("limit-degree"), "failure named: {err}");
    // the report is still written, with the verdict recorded
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("limit_degree_report.json"))).unwrap();
    assert_eq!(report["pass"], false);

    // 3: resource cap
    let out = run(&[
        "simulate-yule",
        "--lambda",
        "1",
        "--m0",
        "1",
        "--T",
        "30",
        "--replicas",
        "10",
        "--cap",
        "100",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_defaults_yield_to_explicit_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"m": 1, "n": 2, "seed": 9}"#).unwrap();
    let out = run(&[
        "enumerate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "3",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("enumerate.csv"));
    let header: serde_json::Value =
        serde_json::from_str(csv.lines().next().unwrap().trim_start_matches("# ")).unwrap();
    assert_eq!(header["params"]["m"], 1, "m comes from the file");
    assert_eq!(header["params"]["n"], 3, "explicit flag overrides the file");
    assert_eq!(header["seed"], 9, "seed comes from the file");

    // malformed config: exit 1 with the file named
    std::fs::write(&cfg, "{oops").unwrap();
    let out = run(&[
        "enumerate",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "1",
        "--n",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cfg.json"));
}

#[test]
fn certificates_round_trip_between_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = run(&[
        "certify",
        "--m",
        "1",
        "--n-min",
        "40",
        "--n-cert",
        "200",
        "--k-max",
        "60",
        "--output",
        out_dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cert_path = dir.path().join("certificate.json");
    let report: serde_json::Value = serde_json::from_str(&read(&cert_path)).unwrap();
    assert_eq!(report["results"]["certificate"]["constants"]["m"], 1);
    assert_eq!(report["results"]["certificate"]["summary"]["violations"], 0);

    // the coupled run accepts the stored certificate after re-verifying it
    let out = run(&[
        "verify-coupling",
        "--m",
        "1",
        "--i",
        "40",
        "--windows",
        "50",
        "--replicas",
        "100",
        "--constants",
        cert_path.to_str().unwrap(),
        "--output",
        out_dir,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // a certificate for the wrong m is a configuration error
    let out = run(&[
        "verify-coupling",
        "--m",
        "2",
        "--i",
        "40",
        "--windows",
        "50",
        "--replicas",
        "100",
        "--constants",
        cert_path.to_str().unwrap(),
        "--output",
        out_dir,
    ]);
    assert_eq!(out.status.code(), Some(1));
}
