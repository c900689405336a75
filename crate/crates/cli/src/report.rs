//! Verification reports and their JSON form.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), so a report read
//! back with [`Report::from_json`] compares equal to the original. Non-finite
//! values are written as `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tol`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Int(i64),
    Real(f64),
    Reals(Vec<f64>),
    Text(String),
    Flag(bool),
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Real(v)
    }
}

impl From<Vec<f64>> for Param {
    fn from(v: Vec<f64>) -> Self {
        Param::Reals(v)
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

impl From<bool> for Param {
    fn from(v: bool) -> Self {
        Param::Flag(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: String,
    pub params: BTreeMap<String, Param>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub duration_s: f64,
}

impl Report {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Report {
            suite: suite.into(),
            params: BTreeMap::new(),
            seed,
            checks: Vec::new(),
            duration_s: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Param>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Conjunction of all check results; an empty report does not pass.
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn sort_checks(&mut self) {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
    }

    /// Replaces every tolerance and re-evaluates the checks.
    pub fn override_tolerance(&mut self, tol: f64) {
        for c in &mut self.checks {
            *c = Check::at_most(std::mem::take(&mut c.name), c.value, tol);
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        if self.checks.is_empty() {
            return Err(CliError::Report("report has no checks".into()));
        }
        if !(self.duration_s >= 0.0) {
            return Err(CliError::Report(format!(
                "negative duration {}",
                self.duration_s
            )));
        }
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"suite\": {},", string(&self.suite));
        out.push_str("  \"params\": {");
        for (i, (k, v)) in self.params.iter().enumerate() {
            let sep = if i == 0 { "\n" } else { ",\n" };
            let _ = write!(out, "{sep}    {}: {}", string(k), param(v));
        }
        out.push_str(if self.params.is_empty() {
            "},\n"
        } else {
            "\n  },\n"
        });
        let _ = writeln!(out, "  \"seed\": {},", self.seed);
        out.push_str("  \"checks\": [\n");
        for (i, c) in self.checks.iter().enumerate() {
            let sep = if i + 1 == self.checks.len() { "" } else { "," };
            let _ = writeln!(
                out,
                "    {{\"name\": {}, \"value\": {}, \"tol\": {}, \"pass\": {}}}{sep}",
                string(&c.name),
                real(c.value),
                real(c.tol),
                c.pass
            );
        }
        out.push_str("  ],\n");
        let _ = writeln!(out, "  \"duration_s\": {},", real(self.duration_s));
        let _ = writeln!(out, "  \"pass\": {}", self.pass());
        out.push_str("}\n");
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let bad = |what: &str| CliError::Report(format!("malformed report: {what}"));
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))?;
        let suite = v["suite"].as_str().ok_or_else(|| bad("suite"))?.to_string();
        let seed = v["seed"].as_u64().ok_or_else(|| bad("seed"))?;
        let duration_s = v["duration_s"].as_f64().ok_or_else(|| bad("duration_s"))?;
        let mut params = BTreeMap::new();
        for (k, p) in v["params"].as_object().ok_or_else(|| bad("params"))? {
            params.insert(k.clone(), read_param(p).ok_or_else(|| bad(k))?);
        }
        let mut checks = Vec::new();
        for c in v["checks"].as_array().ok_or_else(|| bad("checks"))? {
            checks.push(Check {
                name: c["name"]
                    .as_str()
                    .ok_or_else(|| bad("check name"))?
                    .to_string(),
                value: read_real(&c["value"]).ok_or_else(|| bad("check value"))?,
                tol: read_real(&c["tol"]).ok_or_else(|| bad("check tol"))?,
                pass: c["pass"].as_bool().ok_or_else(|| bad("check pass"))?,
            });
        }
        let report = Report {
            suite,
            params,
            seed,
            checks,
            duration_s,
        };
        if v["pass"].as_bool() != Some(report.pass()) {
            return Err(bad("overall pass disagrees with the checks"));
        }
        Ok(report)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let json = self.to_json()?;
        std::fs::write(path, json).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

fn string(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn param(p: &Param) -> String {
    match p {
        Param::Int(i) => i.to_string(),
        Param::Real(x) => real(*x),
        Param::Reals(xs) => {
            let items: Vec<String> = xs.iter().map(|x| real(*x)).collect();
            format!("[{}]", items.join(", "))
        }
        Param::Text(s) => string(s),
        Param::Flag(b) => b.to_string(),
    }
}

fn read_real(v: &Value) -> Option<f64> {
    if v.is_null() {
        Some(f64::NAN)
    } else {
        v.as_f64()
    }
}

fn read_param(v: &Value) -> Option<Param> {
    match v {
        Value::Bool(b) => Some(Param::Flag(*b)),
        Value::String(s) => Some(Param::Text(s.clone())),
        Value::Number(n) if n.is_f64() => n.as_f64().map(Param::Real),
        Value::Number(n) => n.as_i64().map(Param::Int),
        Value::Null => Some(Param::Real(f64::NAN)),
        Value::Array(xs) => xs
            .iter()
            .map(read_real)
            .collect::<Option<Vec<_>>>()
            .map(Param::Reals),
        Value::Object(_) => None,
    }
}
