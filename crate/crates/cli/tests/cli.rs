use std::fs;
use std::process::Command;

fn siot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siot"))
}

#[test]
fn stats_on_bundled_graph() {
    let out = siot().arg("stats").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("nodes,edges,avg_degree,diameter,avg_path_length,avg_clustering,components"));
    assert!(lines.next().unwrap().starts_with("50,150,6,"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(siot().args(["profit", "--bogus"]).output().unwrap().status.code(), Some(2));
    assert_eq!(siot().output().unwrap().status.code(), Some(2));
}

#[test]
fn invalid_values_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let status = siot().args(["mutuality", "--theta", "1.5", "--out", out]).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
    let status = siot().args(["stats", "--graph", "/nonexistent/graph.edges"]).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn scenario_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(&scenario, r#"{"seed": 3, "runs": 2, "mutuality": {"thetas": [0.0, 0.5]}}"#).unwrap();
    let out = dir.path().join("out");
    let status = siot()
        .args(["mutuality", "--scenario", scenario.to_str().unwrap(), "--iterations", "3", "--trace", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("mutuality/metrics.csv")).unwrap();
    assert!(csv.contains("theta=0.5,aggregate,abuse_rate"));
    assert!(!csv.contains("theta=0.3"));
    let summary = fs::read_to_string(out.join("mutuality/summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 3") && summary.contains("\"rounds\": 3"));
    assert!(out.join("mutuality/trace.ndjson").exists());
    assert!(out.join("mutuality/mutuality.svg").exists());
}
