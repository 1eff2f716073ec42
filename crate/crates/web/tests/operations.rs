use gaugeflow_web::{circle_flow_json, cylinder_spectrum_json, toeplitz_json};
use serde_json::Value;

#[test]
fn circle_flow_reports_curves() {
    let v: Value = serde_json::from_str(&circle_flow_json("1", 0.1, 4, 1).unwrap()).unwrap();
    assert_eq!(v["flow"], -1);
    assert_eq!(v["census_flow"], -1);
    assert!(!v["curves"].as_array().unwrap().is_empty());
    let v: Value = serde_json::from_str(&circle_flow_json("1, 1", 0.1, 4, -1).unwrap()).unwrap();
    assert_eq!(v["flow"], 2);
}

#[test]
fn cylinder_comparison_is_close() {
    let v: Value = serde_json::from_str(&cylinder_spectrum_json(-1.0, 1.0, 1.0, 48, 3, 0.1, 10).unwrap()).unwrap();
    let d: Vec<f64> = v["discrete"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let e: Vec<f64> = v["exact"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(d.len(), 10);
    for (a, b) in d.iter().zip(&e) {
        assert!((a - b).abs() < 1e-2 * b.abs().max(1.0));
    }
}

#[test]
fn toeplitz_values() {
    let v: Value = serde_json::from_str(&toeplitz_json("-2").unwrap()).unwrap();
    assert_eq!(v["classical"], 2);
    assert_eq!(v["relative"], 2);
}

#[test]
fn rejects_bad_input() {
    assert!(circle_flow_json("x", 0.1, 4, 1).is_err());
    assert!(circle_flow_json("1", 0.1, 400, 1).is_err());
    assert!(circle_flow_json("1", 0.1, 4, 0).is_err());
    assert!(toeplitz_json("").is_err());
}
