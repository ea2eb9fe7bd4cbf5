//! CSV and JSON output of sweep records.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Result, SweepError};
use crate::sweep::{Field, SweepRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(SweepError::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Ten significant digits, scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.9e}")
    } else {
        x.to_string()
    }
}

fn rounded(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

fn csv_cell(f: &Field) -> String {
    match f {
        Field::Num(x) => format_number(*x),
        Field::Int(i) => i.to_string(),
        Field::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Field::Text(s) => s.clone(),
    }
}

pub fn write_csv<W: Write>(mut w: W, columns: &[String], records: &[SweepRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", columns.join(","))?;
    for r in records {
        let row: Vec<String> = columns.iter().map(|c| r.get(c).map(csv_cell).unwrap_or_default()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

struct JsonRecord<'a>(&'a SweepRecord);

impl Serialize for JsonRecord<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.fields.len()))?;
        for (k, v) in &self.0.fields {
            match v {
                Field::Num(x) if x.is_finite() => map.serialize_entry(k, &rounded(*x))?,
                Field::Num(_) => map.serialize_entry(k, &())?,
                Field::Int(i) => map.serialize_entry(k, i)?,
                Field::Text(t) => map.serialize_entry(k, t)?,
            }
        }
        map.end()
    }
}

pub fn write_json<W: Write>(mut w: W, records: &[SweepRecord]) -> std::io::Result<()> {
    let rows: Vec<JsonRecord> = records.iter().map(JsonRecord).collect();
    serde_json::to_writer_pretty(&mut w, &rows)?;
    writeln!(w)?;
    w.flush()
}

pub fn emit<W: Write>(w: W, format: Format, columns: &[String], records: &[SweepRecord]) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(w, columns, records),
        Format::Json => write_json(w, records),
    }
}

pub fn emit_to_path(path: &Path, format: Format, columns: &[String], records: &[SweepRecord]) -> Result<()> {
    let io = |e: std::io::Error| SweepError::Io { path: path.display().to_string(), message: e.to_string() };
    let file = File::create(path).map_err(io)?;
    emit(BufWriter::new(file), format, columns, records).map_err(io)
}
