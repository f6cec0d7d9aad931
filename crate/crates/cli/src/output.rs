//! Artifact rendering. JSON and CSV are produced from the same rounded
//! cells, so both formats carry identical values.

use std::fmt::Write as _;

use clap::ValueEnum;
use fockhtm::experiment::RunManifest;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Fixed-point text with `decimals` digits; negative zero is printed as zero.
pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|ch| ch == '0' || ch == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl Cell {
    fn text(&self, decimals: usize) -> String {
        match self {
            Cell::Num(x) => fixed(*x, decimals),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn value(&self, decimals: usize) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => {
                let rounded: f64 = fixed(*x, decimals).parse().expect("formatted float");
                json!(rounded)
            }
            Cell::Num(_) => Value::Null,
            Cell::Int(k) => json!(k),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

/// Output of one command: a summary block, a row table and optional
/// structured payloads that only appear in JSON.
pub struct Artifact {
    pub manifest: RunManifest,
    pub decimals: usize,
    pub summary: Vec<(String, Cell)>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub extra: Vec<(String, Value)>,
}

impl Artifact {
    pub fn new(manifest: RunManifest, decimals: usize, headers: &[&str]) -> Self {
        Artifact {
            manifest,
            decimals,
            summary: Vec::new(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn summary(&mut self, key: &str, cell: impl Into<Cell>) {
        self.summary.push((key.to_string(), cell.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    pub fn extra(&mut self, key: &str, value: Value) {
        self.extra.push((key.to_string(), value));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.render_json(),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_json(&self) -> String {
        let d = self.decimals;
        let summary: Map<String, Value> = self.summary.iter().map(|(k, c)| (k.clone(), c.value(d))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(self.headers.iter().cloned().zip(r.iter().map(|c| c.value(d))).collect())
            })
            .collect();
        let mut data = Map::new();
        data.insert("summary".into(), Value::Object(summary));
        data.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            data.insert(k.clone(), v.clone());
        }
        let doc = json!({ "manifest": self.manifest, "data": Value::Object(data) });
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
        text.push('\n');
        text
    }

    fn render_csv(&self) -> String {
        let m = &self.manifest;
        let mut out = String::new();
        writeln!(
            out,
            "# {} {} command={} seed={} config_hash={}",
            m.tool, m.version, m.command, m.master_seed, m.config_hash
        )
        .expect("string write");
        for (k, c) in &self.summary {
            writeln!(out, "# {k}={}", c.text(self.decimals)).expect("string write");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.text(self.decimals))).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }
}
