//! CSV tables with a JSON mirror, and the artifact directory they land in.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    /// An undefined entry, written as an empty CSV cell and `null` in JSON.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
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

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

/// `digits` significant digits in scientific notation; non-finite values
/// print as `nan`, `inf`, `-inf`.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.*e}", digits.saturating_sub(1), x)
    }
}

/// A JSON number with 17 significant digits, or `null` when not finite.
pub fn json_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}"))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `levels` for `levels.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    /// CSV text. A `marker` becomes a leading `# ` comment line.
    pub fn to_csv(&self, digits: usize, marker: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(m) = marker {
            let _ = writeln!(out, "# {m}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Float(x) => format_float(*x, digits),
                    Cell::Int(i) => i.to_string(),
                    Cell::Bool(b) => b.to_string(),
                    Cell::Text(t) => t.clone(),
                    Cell::Missing => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// One object per row, keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| {
                            let v = match c {
                                Cell::Float(x) => json_float(*x),
                                Cell::Int(i) => Value::from(*i),
                                Cell::Bool(b) => Value::Bool(*b),
                                Cell::Text(t) => Value::String(t.clone()),
                                Cell::Missing => Value::Null,
                            };
                            (h.clone(), v)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Serialised writes into one output directory, remembering what was
/// written for the manifest.
pub struct ArtifactDir {
    dir: PathBuf,
    format: Format,
    digits: usize,
    marker: Option<String>,
    written: Vec<String>,
}

impl ArtifactDir {
    pub fn create(dir: &Path, format: Format, digits: usize, marker: Option<String>) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            digits,
            marker,
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn text(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &Value) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        s.push('\n');
        self.text(name, &s)
    }

    pub fn table(&mut self, t: &Table) -> io::Result<()> {
        let csv = t.to_csv(self.digits, self.marker.as_deref());
        self.text(&format!("{}.csv", t.name), &csv)?;
        if self.format == Format::Json {
            self.json(&format!("{}.json", t.name), &t.to_json())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_the_requested_digits() {
        assert_eq!(format_float(1.5, 3), "1.50e0");
        assert_eq!(format_float(-0.000123456, 4), "-1.235e-4");
        assert_eq!(format_float(f64::NAN, 5), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY, 5), "-inf");
        assert_eq!(format_float(2.0, 1), "2e0");
    }

    #[test]
    fn json_keeps_seventeen_digits() {
        let x = 0.1 + 0.2;
        let v = json_float(x);
        assert_eq!(v.to_string(), "3.0000000000000004e-1");
        let back: f64 = v.to_string().parse().unwrap();
        assert_eq!(back, x);
        assert_eq!(json_float(f64::NAN), Value::Null);
    }

    #[test]
    fn csv_and_json_agree_on_layout() {
        let mut t = Table::new("demo", &["a", "b", "c", "d"]);
        t.push(vec![1.25.into(), 3usize.into(), true.into(), Cell::Missing]);
        assert_eq!(t.to_csv(3, None), "a,b,c,d\n1.25e0,3,true,\n");
        assert_eq!(t.to_csv(2, Some("note")), "# note\na,b,c,d\n1.2e0,3,true,\n");
        let j = t.to_json();
        assert_eq!(j[0]["b"], Value::from(3u64));
        assert_eq!(j[0]["d"], Value::Null);
        assert_eq!(j[0]["a"].to_string(), "1.2500000000000000e+0");
    }
}
