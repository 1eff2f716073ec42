use gaugeflow::harness::config::{BaseSweep, SweepRule};
use gaugeflow::harness::{run_experiment, sweep_base, write_summary, ExperimentConfig, ExperimentId};

#[test]
fn identical_configs_give_identical_reports() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment":"EXP7"}"#).unwrap();
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.config_hash, b.config_hash);
    assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    assert!(a.passed);
}

#[test]
fn every_assertion_carries_both_values() {
    let r = run_experiment(&ExperimentConfig::new(ExperimentId::Exp2)).unwrap();
    assert!(r.assertions.len() >= 5);
    for a in &r.assertions {
        assert!(!a.expected.is_null() && !a.computed.is_null(), "{}", a.name);
    }
}

#[test]
fn numerical_failures_become_failed_assertions() {
    // Degree 3 needs M >= 5; the truncation error is reported, not raised.
    let cfg = ExperimentConfig::from_json(r#"{"experiment":"EXP2","circle":{"m_max":4},"gauges":[{"windings":[3]}]}"#).unwrap();
    let r = run_experiment(&cfg).unwrap();
    assert!(!r.passed);
    assert!(r.failed_assertions().any(|a| a.computed.as_str().is_some_and(|s| s.starts_with("error"))));
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_experiment(&ExperimentConfig::new(ExperimentId::Exp1)).unwrap();
    let files = r.write_to(&dir.path().join("EXP1")).unwrap();
    assert!(files.iter().any(|f| f.ends_with("spectra.csv")));
    let e2 = run_experiment(&ExperimentConfig::new(ExperimentId::Exp2)).unwrap();
    let files = e2.write_to(&dir.path().join("EXP2")).unwrap();
    let census = files.iter().find(|f| f.to_string_lossy().ends_with(".census.csv")).unwrap();
    let text = std::fs::read_to_string(census).unwrap();
    assert!(text.starts_with("u_lo,u_hi,direction,branch_id"));
    write_summary(&[r, e2], dir.path()).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(summary.lines().count() > 5);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
}

#[test]
fn sweep_reports_each_fiber() {
    let mut cfg = ExperimentConfig::new(ExperimentId::Exp9);
    cfg.base_sweep = Some(vec![BaseSweep { rule: SweepRule::ShiftConnection, values: vec![0.2, 0.6] }]);
    let s = sweep_base(&cfg).unwrap();
    assert_eq!(s.fibers.len(), 2);
    assert!(s.passed());

    cfg.base_sweep = Some(vec![]);
    let s = sweep_base(&cfg).unwrap();
    assert_eq!(s.fibers.len(), 1);
    assert!(s.passed());
}
