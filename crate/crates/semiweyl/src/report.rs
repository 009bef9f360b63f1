//! Deterministic CSV tables and the JSON run report.
//!
//! CSV: comma-separated, `.` decimal, UTF-8, LF line endings, one
//! documented header line. Floats print as `{:.12e}` so identical inputs
//! produce identical bytes. The JSON report always carries the keys
//! `scenario`, `suite`, `slopes`, `tolerances`, `pass` per suite entry.

use std::collections::BTreeMap;

use serde::Serialize;

/// One CSV table with a fixed header.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<CsvValue>>,
}

#[derive(Clone, Debug)]
pub enum CsvValue {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for CsvValue {
    fn from(v: f64) -> Self {
        CsvValue::Float(v)
    }
}
impl From<usize> for CsvValue {
    fn from(v: usize) -> Self {
        CsvValue::Int(v as i64)
    }
}
impl From<i64> for CsvValue {
    fn from(v: i64) -> Self {
        CsvValue::Int(v)
    }
}
impl From<&str> for CsvValue {
    fn from(v: &str) -> Self {
        CsvValue::Text(v.to_string())
    }
}
impl From<String> for CsvValue {
    fn from(v: String) -> Self {
        CsvValue::Text(v)
    }
}

impl CsvTable {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        CsvTable {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<CsvValue>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    CsvValue::Float(x) => format!("{x:.12e}"),
                    CsvValue::Int(i) => format!("{i}"),
                    CsvValue::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Per-suite outcome: fitted slopes, the tolerances they were judged
/// against, a pass flag, named failures, and the CSV tables produced.
pub struct SuiteOutcome {
    pub suite: String,
    pub slopes: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
    pub failures: Vec<String>,
    pub tables: Vec<CsvTable>,
}

impl SuiteOutcome {
    pub fn new(suite: &str) -> Self {
        SuiteOutcome {
            suite: suite.to_string(),
            slopes: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            pass: true,
            failures: Vec::new(),
            tables: Vec::new(),
        }
    }

    /// Record a checked quantity: `value` must satisfy the comparison
    /// against `bound` or the suite fails with a named criterion.
    pub fn check(&mut self, name: &str, value: f64, bound: f64, at_least: bool) {
        self.slopes.insert(name.to_string(), value);
        self.tolerances.insert(name.to_string(), bound);
        let ok = if at_least { value >= bound } else { value <= bound };
        if !ok {
            self.pass = false;
            self.failures.push(format!(
                "{name}: value {value:.6} {} bound {bound:.6}",
                if at_least { "<" } else { ">" }
            ));
        }
    }

    pub fn fail(&mut self, msg: String) {
        self.pass = false;
        self.failures.push(msg);
    }
}

#[derive(Serialize)]
struct SuiteJson<'a> {
    scenario: &'a str,
    suite: &'a str,
    slopes: &'a BTreeMap<String, f64>,
    tolerances: &'a BTreeMap<String, f64>,
    pass: bool,
    failures: &'a [String],
}

#[derive(Serialize)]
struct ReportJson<'a> {
    scenario: &'a str,
    pass: bool,
    suites: Vec<SuiteJson<'a>>,
}

/// Assemble the JSON report (deterministic: BTreeMaps and fixed field
/// order).
pub fn report_json(scenario: &str, outcomes: &[SuiteOutcome]) -> String {
    let report = ReportJson {
        scenario,
        pass: outcomes.iter().all(|o| o.pass),
        suites: outcomes
            .iter()
            .map(|o| SuiteJson {
                scenario,
                suite: &o.suite,
                slopes: &o.slopes,
                tolerances: &o.tolerances,
                pass: o.pass,
                failures: &o.failures,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_are_deterministic() {
        let mut t = CsvTable::new("x", vec!["hbar", "count"]);
        t.push(vec![0.04.into(), 12usize.into()]);
        let a = t.to_string();
        let b = t.to_string();
        assert_eq!(a, b);
        assert_eq!(a, "hbar,count\n4.000000000000e-2,12\n");
    }

    #[test]
    fn report_has_required_keys() {
        let mut o = SuiteOutcome::new("weyl-sweep");
        o.check("slope", 1.2, 0.8, true);
        let json = report_json("harmonic", &[o]);
        for key in ["\"scenario\"", "\"suite\"", "\"slopes\"", "\"tolerances\"", "\"pass\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["pass"], serde_json::Value::Bool(true));
    }

    #[test]
    fn failing_check_names_criterion() {
        let mut o = SuiteOutcome::new("s");
        o.check("slope_n2", 1.0, 2.8, true);
        assert!(!o.pass);
        assert!(o.failures[0].contains("slope_n2"));
    }
}
