//! Result tables and their CSV and JSON encodings.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing an
//! emitted value gives back the exact `f64`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format};
use crate::error::Result;
use crate::targets;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Flag(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Flag(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            Cell::Real(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Flag(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// Registry ids of the reference values this row reproduces.
    pub targets: Vec<&'static str>,
}

impl Row {
    pub fn new(cells: Vec<Cell>) -> Self {
        Self { cells, targets: Vec::new() }
    }

    pub fn tagged(mut self, id: &'static str) -> Self {
        self.targets.push(id);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Numeric values of one column, in row order.
    pub fn reals(&self, name: &str) -> Vec<f64> {
        let i = self.column(name).unwrap_or_else(|| panic!("no column `{name}`"));
        self.rows.iter().map(|r| r.cells[i].as_real().unwrap_or(f64::NAN)).collect()
    }

    /// The value in `column` of the first row tagged with `target`.
    pub fn tagged_value(&self, target: &str, column: &str) -> Option<f64> {
        let i = self.column(column)?;
        self.rows.iter().find(|r| r.targets.contains(&target)).and_then(|r| r.cells[i].as_real())
    }
}

pub fn write(table: &Table, config: &ExperimentConfig, out: &mut impl Write) -> Result<()> {
    match config.format {
        Format::Csv => write_csv(table, config, out),
        Format::Json => write_json(table, config, out),
    }
}

fn write_csv(table: &Table, config: &ExperimentConfig, out: &mut impl Write) -> Result<()> {
    writeln!(out, "# experiment = {}", config.experiment)?;
    for (k, v) in config.resolved() {
        writeln!(out, "# {k} = {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(table.columns.iter().copied().chain(["target"]))?;
    for row in &table.rows {
        w.write_record(row.cells.iter().map(Cell::render).chain([row.targets.join(";")]))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(table: &Table, config: &ExperimentConfig, out: &mut impl Write) -> Result<()> {
    let params: BTreeMap<String, String> = config.resolved().into_iter().collect();
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj: serde_json::Map<String, Value> =
                table.columns.iter().zip(&row.cells).map(|(c, v)| (c.to_string(), json!(v))).collect();
            obj.insert("target".into(), json!(row.targets));
            Value::Object(obj)
        })
        .collect();
    let mut provenance = serde_json::Map::new();
    for id in table.rows.iter().flat_map(|r| &r.targets) {
        if let Some(t) = targets::lookup(id) {
            provenance.insert(id.to_string(), json!({ "target": t.value, "tolerance": t.tolerance }));
        }
    }
    let doc = json!({
        "config": { "experiment": config.experiment.name(), "params": params },
        "rows": rows,
        "provenance": provenance,
    });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}
