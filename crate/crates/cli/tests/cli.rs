use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaugeflow"))
}

#[test]
fn run_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["run", "EXP7", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("EXP7/report.json").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"[{"experiment":"EXP1","tolerances":{"relative_error":1e-12}}]"#).unwrap();
    let out = bin().args(["run", "EXP1", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"experiment":"EXP3","cylinder":{"radial_elements":2}}"#).unwrap();
    let out = bin().args(["run", "EXP3", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["run", "EXP42", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["run", "EXP2", "--config"]).arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["oracle", "circle"]).env("GAUGEFLOW_WORKERS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_prints_closed_forms() {
    let out = bin().args(["oracle", "circle", "--windings", "1,1", "--m-max", "2", "--u", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["flow"], -2);
    assert_eq!(v["spectrum"].as_array().unwrap().len(), 10);

    let out = bin()
        .args(["oracle", "cylinder", "--lambdas", "0", "--length", "1", "--bc", "minus_id_id", "--window", "7"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let s: Vec<f64> = v["spectrum"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let pi = std::f64::consts::PI;
    let want = [-2.0 * pi, -pi, 0.0, pi, 2.0 * pi];
    assert_eq!(s.len(), want.len());
    for (a, b) in s.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sweep_runs_with_workers_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"EXP9","base_sweep":[{"rule":"shift_connection","values":[0.3,0.7]}]}"#,
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("GAUGEFLOW_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("out/fiber001/report.json").exists());
}
