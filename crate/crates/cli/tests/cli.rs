use std::process::Command;

fn ngca() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ngca"))
}

#[test]
fn generate_estimate_project_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    let sub = dir.path().join("s.json");
    let proj = dir.path().join("z.csv");
    let status = ngca()
        .args(["generate", "--n", "600", "--d-x", "5", "--seed", "3", "-o"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let status = ngca()
        .args(["estimate", "--algorithm", "pca", "--d-s", "2", "-o"])
        .arg(&sub)
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sub).unwrap()).unwrap();
    assert_eq!(doc["d_x"], 5);
    assert_eq!(doc["frame"], "original");
    let status = ngca().arg("project").arg(&data).arg(&sub).arg(&proj).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&proj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p1,p2"));
    assert_eq!(lines.count(), 600);
}

#[test]
fn run_and_rate_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("r.csv");
    std::fs::write(
        &cfg,
        r#"{"algorithms": ["pca"], "n_grid": [100, 200, 400], "trials": 2, "d_x": 4}"#,
    )
    .unwrap();
    let status = ngca().arg("run").arg(&cfg).arg("-o").arg(&out).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(ngca_harness::CSV_HEADER));
    assert_eq!(text.lines().count(), 7);
    let rate = ngca()
        .args(["rate", "--algorithm", "pca", "--metric", "E"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(rate.status.success());
    assert!(String::from_utf8_lossy(&rate.stdout).contains("slope="));
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"trials": 0}"#).unwrap();
    let out = ngca().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials"));
    let out = ngca().args(["project", "/nope.csv", "/nope.json", "/tmp/never.csv"]).output().unwrap();
    assert!(!out.status.success());
    let out = ngca().args(["rate", "--metric", "Q", "/nope.csv"]).output().unwrap();
    assert!(!out.status.success());
}
