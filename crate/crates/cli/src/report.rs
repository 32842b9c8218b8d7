//! Deterministic JSON and CSV documents.
//!
//! Rows are ordered field lists so that key order never depends on a map
//! implementation. Floats are printed with 17 significant digits; non-finite
//! floats become `null` in JSON and an empty field in CSV.

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(u64),
    Float(f64),
    Text(String),
    Floats(Vec<f64>),
    /// Nested structure; CSV receives its compact JSON text.
    Json(serde_json::Value),
}

impl Cell {
    pub fn opt_float(x: Option<f64>) -> Cell {
        x.map_or(Cell::Null, Cell::Float)
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => fmt_float(*x).unwrap_or_default(),
            Cell::Text(s) => s.clone(),
            Cell::Floats(xs) => xs.iter().map(|x| fmt_float(*x).unwrap_or_default()).collect::<Vec<_>>().join(";"),
            Cell::Json(v) => v.to_string(),
        }
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<serde_json::Value> for Cell {
    fn from(v: serde_json::Value) -> Self {
        Cell::Json(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(o: Option<T>) -> Self {
        o.map_or(Cell::Null, Into::into)
    }
}

/// `{:.16e}`, i.e. 17 significant digits; `None` for NaN and infinities.
pub fn fmt_float(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Null => s.serialize_none(),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Int(i) => s.serialize_u64(*i),
            Cell::Float(x) => match fmt_float(*x) {
                Some(text) => RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s),
                None => s.serialize_none(),
            },
            Cell::Text(t) => s.serialize_str(t),
            Cell::Floats(xs) => {
                let mut seq = s.serialize_seq(Some(xs.len()))?;
                for x in xs {
                    seq.serialize_element(&Cell::Float(*x))?;
                }
                seq.end()
            }
            Cell::Json(v) => v.serialize(s),
        }
    }
}

/// An ordered record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(&'static str, Cell)>);

impl Row {
    pub fn new() -> Self {
        Row(Vec::new())
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Cell>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn keys(&self) -> Vec<&'static str> {
        self.0.iter().map(|(k, _)| *k).collect()
    }
}

impl Serialize for Row {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

struct Rows<'a>(&'a [Row]);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for r in self.0 {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command's full output: its echoed configuration and one row per result.
/// `header` fixes the CSV columns even when there are no rows.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Row,
    pub header: &'static [&'static str],
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(command: &'static str, config: Row, header: &'static [&'static str]) -> Self {
        Report { command, config, header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.keys(), self.header, "row does not match the {} header", self.command);
        self.rows.push(row);
    }

    pub fn to_json(&self) -> String {
        let doc = Row::new().with("schema_version", SCHEMA_VERSION as u64).with("command", self.command);
        let mut out = serde_json::to_string_pretty(&Doc { head: &doc, config: &self.config, rows: Rows(&self.rows) })
            .expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.0.iter().map(|(_, v)| v.csv_text())).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

struct Doc<'a> {
    head: &'a Row,
    config: &'a Row,
    rows: Rows<'a>,
}

impl Serialize for Doc<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.head.0.len() + 2))?;
        for (k, v) in &self.head.0 {
            map.serialize_entry(k, v)?;
        }
        map.serialize_entry("config", self.config)?;
        map.serialize_entry("rows", &self.rows)?;
        map.end()
    }
}
