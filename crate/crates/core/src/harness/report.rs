use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentId;
use crate::error::Result;
use crate::flow::SpectralFlowResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub expected: Value,
    pub computed: Value,
    pub passed: bool,
}

/// A CSV artifact attached to a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentId,
    pub title: String,
    pub config_hash: String,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
    pub quantities: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub flows: Vec<(String, SpectralFlowResult)>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(experiment: ExperimentId, title: impl Into<String>, config_hash: String) -> Self {
        Self {
            experiment,
            title: title.into(),
            config_hash,
            passed: true,
            assertions: Vec::new(),
            quantities: BTreeMap::new(),
            warnings: Vec::new(),
            wall_time_s: 0.0,
            flows: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn assert(&mut self, name: impl Into<String>, expected: impl Serialize, computed: impl Serialize, passed: bool) {
        self.passed &= passed;
        self.assertions.push(Assertion {
            name: name.into(),
            expected: serde_json::to_value(expected).unwrap_or(Value::Null),
            computed: serde_json::to_value(computed).unwrap_or(Value::Null),
            passed,
        });
    }

    pub fn assert_eq<T: Serialize + PartialEq>(&mut self, name: impl Into<String>, expected: T, computed: T) {
        let ok = expected == computed;
        self.assert(name, expected, computed, ok);
    }

    /// Records an upstream failure as a failed assertion.
    pub fn assert_error(&mut self, name: impl Into<String>, expected: impl Serialize, err: &crate::Error) {
        self.assert(name, expected, format!("error: {err}"), false);
    }

    pub fn quantity(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.quantities.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn failed_assertions(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    /// Report JSON without timing, byte-identical across runs of the same configuration.
    pub fn canonical_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_time_s = 0.0;
        Ok(serde_json::to_string_pretty(&copy)?)
    }

    /// Writes `report.json` plus census, curve and table CSVs under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let report = dir.join("report.json");
        fs::write(&report, serde_json::to_string_pretty(self)?)?;
        written.push(report);
        for (name, flow) in &self.flows {
            let stem = sanitize(name);
            let census = dir.join(format!("{stem}.census.csv"));
            flow.write_census_csv(fs::File::create(&census)?)?;
            let curves = dir.join(format!("{stem}.curves.csv"));
            flow.write_curves_csv(fs::File::create(&curves)?)?;
            written.push(census);
            written.push(curves);
        }
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", sanitize(&t.name)));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sanitize(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

/// `summary.json` and `summary.csv` (one row per assertion) for a batch of reports.
pub fn write_summary(reports: &[ExperimentReport], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    #[derive(Serialize)]
    struct Line<'a> {
        experiment: ExperimentId,
        title: &'a str,
        passed: bool,
        assertions: usize,
        failed: usize,
        config_hash: &'a str,
    }
    let lines: Vec<Line> = reports
        .iter()
        .map(|r| Line {
            experiment: r.experiment,
            title: &r.title,
            passed: r.passed,
            assertions: r.assertions.len(),
            failed: r.failed_assertions().count(),
            config_hash: &r.config_hash,
        })
        .collect();
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&lines)?)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record(["experiment", "assertion", "expected", "computed", "passed"])?;
    for r in reports {
        for a in &r.assertions {
            w.write_record([
                r.experiment.to_string(),
                a.name.clone(),
                a.expected.to_string(),
                a.computed.to_string(),
                a.passed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
