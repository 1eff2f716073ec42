//! One line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;

use gaugeflow::harness::{run_experiment, ExperimentConfig, ExperimentId, ExperimentReport};
use serde_json::Value;

fn flows(r: &ExperimentReport, suffix: &str) -> Vec<i64> {
    r.quantities
        .iter()
        .filter(|(k, _)| k.starts_with("flow.") && k.ends_with(suffix))
        .filter_map(|(_, v)| v.as_i64())
        .collect()
}

fn flow(r: &ExperimentReport, name: &str) -> Option<i64> {
    r.quantities.get(&format!("flow.{name}")).and_then(Value::as_i64)
}

fn line(n: usize, ok: bool, detail: String) -> bool {
    println!("criterion {n:>2}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() -> ExitCode {
    let reports: Vec<ExperimentReport> = ExperimentId::ALL
        .iter()
        .map(|&id| run_experiment(&ExperimentConfig::new(id)).expect("default configuration resolves"))
        .collect();
    let r = |id: ExperimentId| &reports[id.number() - 1];
    let mut all = true;

    let e1 = r(ExperimentId::Exp1);
    all &= line(
        1,
        e1.passed && e1.wall_time_s < 60.0,
        format!(
            "EXP1 max rel error {} ratio [{}, {}] in {:.1} s",
            e1.quantities["max_rel_error.n_r=48"],
            e1.quantities["error_ratio_min.48->96"],
            e1.quantities["error_ratio_max.48->96"],
            e1.wall_time_s
        ),
    );

    let e2 = r(ExperimentId::Exp2);
    let f2: Vec<Option<i64>> = ["windings[1]", "windings[-1]", "windings[2]", "windings[1,1]"]
        .iter()
        .map(|g| flow(e2, &format!("circle {g}")))
        .collect();
    all &= line(
        2,
        e2.passed && f2 == [Some(-1), Some(1), Some(-2), Some(-2)] && e2.wall_time_s < 30.0,
        format!("EXP2 flows {f2:?} in {:.1} s", e2.wall_time_s),
    );

    let e3 = r(ExperimentId::Exp3);
    let f3: Vec<Option<i64>> = ["windings[1]", "windings[2]"].iter().map(|g| flow(e3, &format!("{g} cylinder"))).collect();
    all &= line(
        3,
        e3.passed && f3 == [Some(1), Some(2)] && e3.wall_time_s < 300.0,
        format!("EXP3 cylinder flows {f3:?} in {:.1} s", e3.wall_time_s),
    );

    let e4 = r(ExperimentId::Exp4);
    let f4 = flows(e4, "");
    all &= line(4, e4.passed && f4.len() == 6 && f4.iter().all(|&f| f == 1), format!("EXP4 flows {f4:?}"));

    let e5 = r(ExperimentId::Exp5);
    let f5 = flows(e5, "");
    all &= line(5, e5.passed && !f5.is_empty() && f5.iter().all(|&f| f == 0), format!("EXP5 flows {f5:?}"));

    let e6 = r(ExperimentId::Exp6);
    all &= line(6, e6.passed, format!("EXP6 {} assertions", e6.assertions.len()));

    let e7 = r(ExperimentId::Exp7);
    let f7: Vec<Option<i64>> = ["windings[1]", "windings[-2]", "windings[1,-1]"]
        .iter()
        .map(|g| flow(e7, &format!("{g} conjugation")))
        .collect();
    all &= line(7, e7.passed && f7 == [Some(-1), Some(2), Some(0)], format!("EXP7 flows {f7:?} (toeplitz = relative = flow)"));

    let e8 = r(ExperimentId::Exp8);
    all &= line(8, e8.passed, format!("EXP8 flows {:?}", flows(e8, "")));

    let e9 = r(ExperimentId::Exp9);
    let f9 = flows(e9, "");
    all &= line(9, e9.passed && f9.len() == 16, format!("EXP9 {} fibers, flows {f9:?}", f9.len()));

    let census_ok = reports.iter().all(|r| {
        r.assertions.iter().any(|a| a.name.starts_with("census") && a.passed)
    });
    let residual = reports
        .iter()
        .filter_map(|r| r.quantities.get("max_hermiticity_residual").and_then(Value::as_f64))
        .fold(0.0, f64::max);
    all &= line(10, census_ok && residual <= 1e-10, format!("census consistent everywhere, max hermiticity residual {residual:e}"));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
