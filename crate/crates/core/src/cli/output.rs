//! Result documents: every number carries the operation that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::grid::Grid;

/// JSON number, or the strings `"inf"`, `"-inf"`, `"nan"` where JSON has none.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: Value,
    pub source: String,
}

/// A named table written as RFC-4180 CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        let io = |e: csv::Error| LabError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }
}

/// Shortest round-trip rendering.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Collected output of one scenario.
#[derive(Debug, Default)]
pub struct Report {
    pub quantities: Vec<Quantity>,
    pub tables: Vec<Table>,
    /// Pre-rendered CSV files `(file name, bytes)`.
    pub files: Vec<(String, Vec<u8>)>,
    /// Binary checkpoint bytes, if the scenario produced a trajectory.
    pub checkpoint: Option<Vec<u8>>,
    /// Scenario verdict; `false` turns into a nonzero exit status.
    pub passed: bool,
}

impl Report {
    pub fn new() -> Self {
        Self {
            passed: true,
            ..Default::default()
        }
    }

    pub fn put(&mut self, name: impl Into<String>, value: f64, source: &str) {
        self.put_value(name, num(value), source);
    }

    pub fn put_value(&mut self, name: impl Into<String>, value: Value, source: &str) {
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            source: source.to_string(),
        });
    }

    /// Flattens a serializable record into quantities `prefix.field`, all
    /// attributed to `source`.
    pub fn put_record(
        &mut self,
        prefix: &str,
        record: &impl Serialize,
        source: &str,
    ) -> Result<()> {
        let v = serde_json::to_value(record).map_err(|e| LabError::Io(e.to_string()))?;
        flatten(prefix, &v, &mut |name, value| {
            self.put_value(name, value, source)
        });
        Ok(())
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut impl FnMut(String, Value)) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let name = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&name, x, out);
            }
        }
        other => out(prefix.to_string(), other.clone()),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproducibility {
    pub config_hash: String,
    pub seed: u64,
    pub grid: Option<GridInfo>,
    pub version: String,
    pub rng: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dims: usize,
    pub half_extent: f64,
    pub points: usize,
}

impl From<Grid> for GridInfo {
    fn from(g: Grid) -> Self {
        Self {
            dims: g.dims(),
            half_extent: g.half_extent(),
            points: g.points(),
        }
    }
}

/// Writes `results.json`, one CSV per table and `checkpoint.fnlsckpt`;
/// returns the paths written.
pub fn write_report(
    dir: &Path,
    scenario: &str,
    repro: &Reproducibility,
    report: &Report,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut artifacts: Vec<String> = report
        .tables
        .iter()
        .map(|t| format!("{}.csv", t.name))
        .collect();
    artifacts.extend(report.files.iter().map(|f| f.0.clone()));
    if report.checkpoint.is_some() {
        artifacts.push("checkpoint.fnlsckpt".into());
    }
    let doc = json!({
        "scenario": scenario,
        "passed": report.passed,
        "reproducibility": repro,
        "results": report.quantities,
        "artifacts": artifacts,
    });
    let path = dir.join("results.json");
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| LabError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    for t in &report.tables {
        let path = dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.to_csv()?)?;
        written.push(path);
    }
    for (name, bytes) in &report.files {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
    }
    if let Some(bytes) = &report.checkpoint {
        let path = dir.join("checkpoint.fnlsckpt");
        fs::write(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}

/// Machine-readable error record.
pub fn error_record(err: &LabError) -> Value {
    let kind = format!("{err:?}");
    let kind = kind
        .split(['(', ' ', '{'])
        .next()
        .unwrap_or("Unknown")
        .to_string();
    json!({ "error": { "kind": kind, "message": err.to_string() } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_crlf() {
        let mut t = Table::new("t", &["a", "b,c"]);
        t.rows.push(vec!["x\"y".into(), "1".into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "a,\"b,c\"\r\n\"x\"\"y\",1\r\n");
    }

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(num(0.5), json!(0.5));
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn records_flatten_with_source() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: Inner,
        }
        #[derive(Serialize)]
        struct Inner {
            c: u32,
        }
        let mut rep = Report::new();
        rep.put_record(
            "r",
            &R {
                a: 1.0,
                b: Inner { c: 2 },
            },
            "op",
        )
        .unwrap();
        let names: Vec<_> = rep.quantities.iter().map(|q| q.name.as_str()).collect();
        assert_eq!(names, ["r.a", "r.b.c"]);
        assert!(rep.quantities.iter().all(|q| q.source == "op"));
    }

    #[test]
    fn error_kind_is_the_variant_name() {
        let e = LabError::Config("x".into());
        assert_eq!(error_record(&e)["error"]["kind"], "Config");
    }

    #[test]
    fn hash_is_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
