//! Structured verification records and their JSON / CSV encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Result;

/// One check: what was evaluated, with which parameters, what was observed,
/// the bound it was compared against, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub params: Map<String, Value>,
    pub observed: Map<String, Value>,
    pub bound: Map<String, Value>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            params: Map::new(),
            observed: Map::new(),
            bound: Map::new(),
            pass: true,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn observe(&mut self, key: &str, value: impl Into<Value>) {
        self.observed.insert(key.to_owned(), value.into());
    }

    pub fn set_bound(&mut self, key: &str, value: impl Into<Value>) {
        self.bound.insert(key.to_owned(), value.into());
    }

    /// Records a named boolean sub-check and folds it into the verdict.
    pub fn require(&mut self, key: &str, ok: bool) {
        self.observed.insert(format!("{key}.ok"), Value::Bool(ok));
        self.pass &= ok;
    }

    pub fn observed_f64(&self, key: &str) -> Option<f64> {
        self.observed.get(key).and_then(Value::as_f64)
    }
}

/// Non-finite floats have no JSON encoding; they are written as strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// A suite run: configuration echo, provenance hash, and the reports in case order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCollection {
    pub suite: String,
    pub config: Map<String, Value>,
    pub corpus_hash: String,
    pub passed: usize,
    pub failed: usize,
    pub reports: Vec<VerificationReport>,
}

impl ReportCollection {
    pub fn new(
        suite: &str,
        config: Map<String, Value>,
        corpus_hash: String,
        reports: Vec<VerificationReport>,
    ) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        Self {
            suite: suite.to_owned(),
            config,
            corpus_hash,
            passed,
            failed: reports.len() - passed,
            reports,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per report; `params`, `observed` and `bound` are flattened into
    /// dotted columns (`observed.lhs`, `bound.rhs`, ...). Columns are the sorted
    /// union over all reports.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Map<String, Value>> = self.reports.iter().map(flatten_report).collect();
        let mut columns: Vec<String> = rows.iter().flat_map(|r| r.keys().cloned()).collect();
        columns.sort();
        columns.dedup();
        let mut header = vec!["check".to_owned(), "pass".to_owned()];
        header.extend(columns.iter().cloned());

        let mut w = csv::Writer::from_writer(out);
        w.write_record(&header)?;
        for (report, row) in self.reports.iter().zip(&rows) {
            let mut record = vec![report.check.clone(), report.pass.to_string()];
            record.extend(columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8_lossy(&buf).into_owned())
    }
}

fn flatten_report(r: &VerificationReport) -> Map<String, Value> {
    let mut out = Map::new();
    for (prefix, obj) in [
        ("params", &r.params),
        ("observed", &r.observed),
        ("bound", &r.bound),
    ] {
        for (k, v) in obj {
            flatten_into(&mut out, &format!("{prefix}.{k}"), v);
        }
    }
    out
}

fn flatten_into(out: &mut Map<String, Value>, key: &str, v: &Value) {
    match v {
        Value::Object(obj) => {
            for (k, inner) in obj {
                flatten_into(out, &format!("{key}.{k}"), inner);
            }
        }
        other => {
            out.insert(key.to_owned(), other.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn require_folds_into_pass() {
        let mut r = VerificationReport::new("x");
        r.require("a", true);
        assert!(r.pass);
        r.require("b", false);
        assert!(!r.pass);
        assert_eq!(r.observed["b.ok"], Value::Bool(false));
    }

    #[test]
    fn report_json_shape() {
        let mut r = VerificationReport::new("demo").param("n", 3);
        r.observe("lhs", 1.5);
        r.set_bound("rhs", 2.0);
        let v: Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["bound", "check", "observed", "params", "pass"]);
    }

    #[test]
    fn csv_flattens_with_dotted_columns() {
        let mut a = VerificationReport::new("a");
        a.observe("lhs", 1.0);
        let mut nested = Map::new();
        nested.insert("inner".into(), Value::from(2));
        a.observe("group", Value::Object(nested));
        let mut b = VerificationReport::new("b");
        b.set_bound("rhs", 4.0);
        b.pass = false;
        let c = ReportCollection::new("s", Map::new(), "h".into(), vec![a, b]);
        let text = c.to_csv().unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "check,pass,bound.rhs,observed.group.inner,observed.lhs"
        );
        assert_eq!(lines.next().unwrap(), "a,true,,2,1.0");
        assert_eq!(lines.next().unwrap(), "b,false,4.0,,");
        assert_eq!(c.failed, 1);
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(0.5), Value::from(0.5));
    }
}
