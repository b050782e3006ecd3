use std::process::{Command, Output};

use mixbench::runner::{self, read_csv, VerificationRecord};

fn mixbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixbench"))
        .args(args)
        .env_remove("MIXBENCH_NMAX_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn run_default_prints_pass() {
    let out = mixbench(&["run"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("firstq=2.82842712474619"), "{text}");
    assert!(text.contains("| pass"));
}

#[test]
fn known_divergence_exits_zero() {
    let out = mixbench(&["run", "--statistics", "fermion", "--n1", "3", "--n2", "2", "--n3", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("known-divergence"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mixbench(&["run", "--n1", "0"]).status.code(), Some(2));
    assert_eq!(mixbench(&["run", "--sa", "1+"]).status.code(), Some(2));
    assert_eq!(mixbench(&["run", "--format", "yaml"]).status.code(), Some(2));
    assert_eq!(mixbench(&["paths", "v x u"]).status.code(), Some(2));
    assert_eq!(mixbench(&["verify", "--tolerance", "0"]).status.code(), Some(2));
    assert_eq!(mixbench(&["verify", "--nmax", "2"]).status.code(), Some(2));
    assert_eq!(mixbench(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn fermion_cap_is_reported_and_overridable() {
    let args = [
        "run",
        "--statistics",
        "fermion",
        "--n1",
        "4",
        "--n2",
        "4",
        "--n3",
        "1",
        "--engines",
        "firstq",
    ];
    let out = mixbench(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap of 8"));

    let out = Command::new(env!("CARGO_BIN_EXE_mixbench"))
        .args(args)
        .env("MIXBENCH_NMAX_CAP", "9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // Without an explicit engine list the oracle takes over above the cap.
    let out = mixbench(&["run", "--statistics", "fermion", "--n1", "4", "--n2", "4", "--n3", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("firstq="));
}

#[test]
fn paths_reproduce_the_worked_examples() {
    let text = stdout(&mixbench(&["paths", "v v u"]));
    assert!(text.contains("paths: 4"), "{text}");
    assert!(
        text.contains("0.8164965809277261*S_A + 0.8164965809277261*S_B"),
        "{text}"
    );

    let text = stdout(&mixbench(&["paths", "v v u", "--statistics", "fermion"]));
    assert!(text.contains("paths: 0"));
    assert!(text.contains("exclusion-free paths on the expanded state: 4"), "{text}");
    assert!(text.trim_end().ends_with("total = 0 = 0"), "{text}");

    let text = stdout(&mixbench(&[
        "paths",
        "phi v u",
        "--experiment",
        "type2",
        "--n",
        "3",
        "--epsilon",
        "0",
        "--statistics",
        "fermion",
    ]));
    assert!(text.contains("paths: 2"), "{text}");
}

#[test]
fn paths_json_is_parseable() {
    let out = mixbench(&["paths", "v v u", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["paths"].as_array().unwrap().len(), 4);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# grid\nstatistics = boson\nn1 = 1..2\nn2 = 1\nn3 = 0\nsa = 0.3+0.1i\nformat = csv\n",
    )
    .unwrap();
    let text = stdout(&mixbench(&["run", "--config", cfg.to_str().unwrap(), "--n3", "1"]));
    let rows = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.n3 == Some(1)));
    assert!(rows.iter().all(|r| r.sa == mixbench::Complex::new(0.3, 0.1)));
}

#[test]
fn sweep_output_is_byte_stable_and_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, j) = (
        dir.path().join("a.csv"),
        dir.path().join("b.csv"),
        dir.path().join("r.json"),
    );
    let grid = [
        "--experiment",
        "type2",
        "--n",
        "2..4",
        "--epsilon",
        "0,0.1,1/3",
        "--sb",
        "-1+0.5i",
    ];
    for path in [&a, &b] {
        let mut args = vec!["sweep", "--out", path.to_str().unwrap()];
        args.extend(grid);
        assert_eq!(mixbench(&args).status.code(), Some(0));
    }
    let csv_bytes = std::fs::read(&a).unwrap();
    assert_eq!(csv_bytes, std::fs::read(&b).unwrap());

    let mut args = vec!["run", "--format", "json", "--out", j.to_str().unwrap()];
    args.extend(grid);
    assert_eq!(mixbench(&args).status.code(), Some(0));
    let records: Vec<VerificationRecord> = serde_json::from_slice(&std::fs::read(&j).unwrap()).unwrap();
    assert_eq!(runner::csv_rows(&records), read_csv(csv_bytes.as_slice()).unwrap());
    assert_eq!(records.len(), 9);
}

#[test]
fn verify_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let start = std::time::Instant::now();
    let out = mixbench(&["verify", "--nmax", "3", "--out", path.to_str().unwrap()]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(out.status.code(), Some(0));
    let report: runner::VerifyReport = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(report.summary.fail, 0);
    assert_eq!(report.summary.total, report.records.len());
}
