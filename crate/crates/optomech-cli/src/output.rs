//! Tables with a metadata header, written as CSV or JSON.

use serde::Serialize;
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn value(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    /// (column, unit)
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[(&'static str, &'static str)]) -> Self {
        Table { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Two-column key/value table.
    pub fn summary(name: &'static str, entries: Vec<(&'static str, Cell, &'static str)>) -> Self {
        let mut t = Table::new(name, &[("quantity", ""), ("value", ""), ("unit", "")]);
        for (k, v, u) in entries {
            t.push(vec![k.into(), v, u.into()]);
        }
        t
    }

    fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for ((c, _), v) in self.columns.iter().zip(r) {
                    m.insert(c.to_string(), v.value());
                }
                Value::Object(m)
            })
            .collect();
        json!(rows)
    }

    fn units(&self) -> String {
        self.columns
            .iter()
            .filter(|(_, u)| !u.is_empty())
            .map(|(c, u)| format!("{c} [{u}]"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Everything one subcommand emits.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub tables: Vec<Table>,
    /// replaces the table dump in JSON output when set
    pub json: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub scenario: String,
    pub scenario_sha256: String,
    /// scenario after defaults and flag overrides
    pub effective_scenario: Value,
}

fn header(meta: &Metadata, table: &Table) -> String {
    let mut h = String::new();
    h.push_str(&format!("# {} {}\n", meta.tool, meta.version));
    h.push_str(&format!("# command: {}\n", meta.command));
    h.push_str(&format!("# scenario: {}\n", meta.scenario));
    h.push_str(&format!("# scenario_sha256: {}\n", meta.scenario_sha256));
    if let Some(opts) = meta.effective_scenario.get("options") {
        h.push_str(&format!("# options: {opts}\n"));
    }
    h.push_str(&format!("# table: {}\n", table.name));
    let units = table.units();
    if !units.is_empty() {
        h.push_str(&format!("# units: {units}\n"));
    }
    h
}

fn csv_body(table: &Table) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.columns.iter().map(|(c, _)| *c))?;
    for r in &table.rows {
        w.write_record(r.iter().map(Cell::render))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_document(meta: &Metadata, report: &Report) -> String {
    let data = match &report.json {
        Some(v) => v.clone(),
        None => {
            let mut m = Map::new();
            for t in &report.tables {
                m.insert(t.name.to_string(), t.to_json());
            }
            Value::Object(m)
        }
    };
    let mut units = Map::new();
    for t in &report.tables {
        for (c, u) in &t.columns {
            if !u.is_empty() {
                units.insert(format!("{}.{c}", t.name), json!(u));
            }
        }
    }
    let doc = json!({ "metadata": meta, "units": units, "data": data });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// Writes to `out` (one file per table for CSV) or to stdout. Returns the
/// files written.
pub fn emit(meta: &Metadata, report: &Report, format: Format, out: Option<&Path>) -> std::io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match (format, out) {
        (Format::Json, None) => {
            std::io::stdout().write_all(json_document(meta, report).as_bytes())?;
        }
        (Format::Json, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{}.json", report.command));
            std::fs::write(&path, json_document(meta, report))?;
            written.push(path);
        }
        (Format::Csv, None) => {
            let mut stdout = std::io::stdout().lock();
            for (i, t) in report.tables.iter().enumerate() {
                if i > 0 {
                    writeln!(stdout)?;
                }
                stdout.write_all(header(meta, t).as_bytes())?;
                stdout.write_all(csv_body(t)?.as_bytes())?;
            }
        }
        (Format::Csv, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            for t in &report.tables {
                let path = dir.join(format!("{}_{}.csv", report.command, t.name));
                std::fs::write(&path, header(meta, t) + &csv_body(t)?)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
