use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::Result;
use crate::fmt_sig;

/// One independent unit of work and its measured values.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub name: String,
    pub values: BTreeMap<String, f64>,
    /// Set when the case failed to run; its checks then fail.
    pub error: Option<String>,
}

impl CaseRecord {
    pub fn ok(name: impl Into<String>) -> Self {
        Self { name: name.into(), values: BTreeMap::new(), error: None }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn failed(name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Self { name: name.into(), values: BTreeMap::new(), error: Some(err.to_string()) }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// A pass/fail assertion against a declared tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable relation, e.g. `"<= 1e-10"`.
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!("<= {}", fmt_sig(bound)), pass: value <= bound }
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!("< {}", fmt_sig(bound)), pass: value < bound }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!("> {}", fmt_sig(bound)), pass: value > bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound: format!(">= {}", fmt_sig(bound)), pass: value >= bound }
    }

    /// A yes/no condition; `value` is 1 when it holds.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), value: if ok { 1.0 } else { 0.0 }, bound: "holds".into(), pass: ok }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => fmt_sig(*f),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// A CSV table written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Outcome of one experiment. Contains no timing data, so it is a pure
/// function of the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: Value,
    pub cases: Vec<CaseRecord>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.error.is_none()) && self.checks.iter().all(|c| c.pass)
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed() {
            "pass"
        } else {
            "fail"
        }
    }

    pub fn to_value(&self) -> Value {
        let cases: Vec<Value> = self
            .cases
            .iter()
            .map(|c| {
                let mut m = serde_json::Map::new();
                m.insert("name".into(), Value::String(c.name.clone()));
                m.insert("status".into(), Value::String(if c.error.is_some() { "error" } else { "ok" }.into()));
                m.insert("values".into(), Value::Object(c.values.iter().map(|(k, v)| (k.clone(), num(*v))).collect()));
                if let Some(e) = &c.error {
                    m.insert("error".into(), Value::String(e.clone()));
                }
                Value::Object(m)
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "value": num(c.value),
                    "bound": c.bound,
                    "pass": c.pass,
                })
            })
            .collect();
        serde_json::json!({
            "config": round_floats(&self.config),
            "cases": cases,
            "checks": checks,
            "verdict": self.verdict(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.json` and one CSV per table into `dir`; returns the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let p = dir.join("report.json");
        std::fs::write(&p, self.to_json())?;
        written.push(p);
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            std::fs::write(&p, t.to_csv())?;
            written.push(p);
        }
        Ok(written)
    }
}

/// A JSON number carrying 12 significant digits; non-finite values become strings.
pub(crate) fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::String(v.to_string());
    }
    let rounded: f64 = fmt_sig(v).parse().expect("fmt_sig output parses");
    serde_json::Number::from_f64(rounded).map(Value::Number).unwrap_or(Value::Null)
}

fn round_floats(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64")),
        Value::Array(a) => Value::Array(a.iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), round_floats(v))).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(0.1 + 0.2).to_string(), "0.3");
        assert_eq!(num(1.0 / 3.0).to_string(), "0.333333333333");
        assert_eq!(num(f64::NAN), Value::String("NaN".into()));
    }

    #[test]
    fn csv_rendering() {
        let mut t = Table::new("x", &["a", "b", "c"]);
        t.push(vec![1usize.into(), (2.0f64 / 3.0).into(), "z".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1,0.666666666667,z\n");
    }

    #[test]
    fn verdict_reflects_errors_and_checks() {
        let mut r = Report { config: Value::Null, cases: vec![CaseRecord::ok("a")], checks: vec![Check::at_most("x", 1.0, 2.0)], tables: vec![] };
        assert!(r.passed());
        r.checks.push(Check::below("y", 1.0, 1.0));
        assert_eq!(r.verdict(), "fail");
        r.checks.pop();
        r.cases.push(CaseRecord::failed("b", "boom"));
        assert!(!r.passed());
    }
}
