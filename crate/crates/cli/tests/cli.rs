use std::process::Command;

use sflab::Report;

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .output()
        .expect("lab starts")
}

#[test]
fn trace_has_header_and_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("vc.csv");
    let out = lab(&[
        "run",
        "vanishing-cycle",
        "--samples",
        "1",
        "--t",
        "1,0.5",
        "--step",
        "1e-2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "step,param,c0,c1,c2,c3,c4,c5,c6,c7,residual");
    // 50 steps from t = 1 to t = 0.5
    assert_eq!(rows.len() - 1, 51);
    for row in &rows[1..] {
        let residual: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(residual <= 1e-9);
    }
}

#[test]
fn report_goes_to_stdout_without_out() {
    let out = lab(&["run", "g-of-t", "--t", "0.5,2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.suite, "g-of-t");
    assert!(report.duration_s >= 0.0);
    assert_eq!(report.checks.len(), 4);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lab.cfg");
    std::fs::write(&cfg, "# model twist on S^3\nn = 3\nsamples = 2\nseed = 9\n").unwrap();
    let out = lab(&[
        "run",
        "model-twist",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.seed, 4);
    assert_eq!(report.params["n"], sflab::Param::Int(3));
}

#[test]
fn trace_for_a_suite_without_transports_is_a_usage_error() {
    let out = lab(&["run", "g-of-t", "--trace", "/tmp/never.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let out = lab(&["run", "g-of-t", "--out", "/nonexistent-dir/report.json"]);
    assert_eq!(out.status.code(), Some(2));
}
