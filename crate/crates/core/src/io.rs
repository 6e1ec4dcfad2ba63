//! CSV and JSON files. Numbers are written with 17 significant digits so
//! every `f64` reads back exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Int(usize),
    Float(f64),
    Text(&'a str),
}

impl From<usize> for Cell<'_> {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell<'_> {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl<'a> From<&'a str> for Cell<'a> {
    fn from(v: &'a str) -> Self {
        Cell::Text(v)
    }
}

fn push_cell(out: &mut String, cell: Cell<'_>) {
    match cell {
        Cell::Int(v) => write!(out, "{v}"),
        Cell::Float(v) if v.is_nan() => write!(out, "nan"),
        Cell::Float(v) => write!(out, "{v:.16e}"),
        Cell::Text(s) => write!(out, "{s}"),
    }
    .expect("writing to a String cannot fail");
}

/// Render rows as comma-separated text with a header and LF line endings.
pub fn render_csv<'a>(header: &[&str], rows: impl IntoIterator<Item = Vec<Cell<'a>>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, cell) in row.into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_cell(&mut out, cell);
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_csv<'a>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell<'a>>>) -> Result<()> {
    write_text(path, &render_csv(header, rows))
}

pub fn write_series(path: &Path, x: &TimeSeries) -> Result<()> {
    write_csv(
        path,
        &["time", "value"],
        x.times()
            .iter()
            .zip(x.values())
            .map(|(&t, &v)| vec![t.into(), v.into()]),
    )
}

/// Read a `time,value` CSV with a header line.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_series(&text).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_series(text: &str) -> Result<TimeSeries> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::domain("empty CSV"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::domain(format!("CSV header lacks a '{name}' column")))
    };
    let (ti, vi) = (find("time")?, find("value")?);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::domain(format!("bad number on data line {}", n + 1)))
        };
        times.push(get(ti)?);
        values.push(get(vi)?);
    }
    TimeSeries::new(times, values)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}
