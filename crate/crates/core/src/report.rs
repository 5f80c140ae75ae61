//! Plot-ready CSV reports.
//!
//! Every file starts with `# schema=<name>/1`, optionally followed by more
//! `#` comment lines, then the header row. Floats are written in Rust's
//! shortest round-trip form so parsing them back is bit-exact. LF endings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    fn render(&self, out: &mut String) {
        match self {
            Value::Int(v) => write!(out, "{v}").unwrap(),
            Value::Float(v) => render_float(*v, out),
            Value::Text(s) => out.push_str(s),
        }
    }
}

fn render_float(v: f64, out: &mut String) {
    if v.is_nan() {
        out.push_str("NaN");
    } else if v.is_infinite() {
        out.push_str(if v > 0.0 { "inf" } else { "-inf" });
    } else {
        // Debug formatting is the shortest string that parses back to `v`.
        write!(out, "{v:?}").unwrap();
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvReport {
    pub schema: String,
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl CsvReport {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Self {
            schema: schema.to_string(),
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match schema {}",
            self.schema
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# schema={}/{}", self.schema, SCHEMA_VERSION).unwrap();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                v.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

pub fn emit_csv(report: &CsvReport, path: &Path) -> Result<()> {
    fs::write(path, report.render()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A parsed report: schema tag, header and raw cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub schema: String,
    /// Comment lines after the schema line, without the leading `# `.
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn float(&self, row: usize, name: &str) -> Option<f64> {
        let idx = self.column(name)?;
        self.rows.get(row)?.get(idx)?.parse().ok()
    }
}

pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let mut schema = None;
    let mut columns = None;
    let mut comments = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            match rest.strip_prefix("schema=") {
                Some(s) if schema.is_none() => schema = Some(s.to_string()),
                _ => comments.push(rest.to_string()),
            }
            continue;
        }
        let cells: Vec<String> = line.split(',').map(str::to_string).collect();
        if columns.is_none() {
            columns = Some(cells);
        } else {
            rows.push(cells);
        }
    }
    Ok(ParsedCsv {
        schema: schema.ok_or_else(|| Error::invariant("csv without schema line"))?,
        comments,
        columns: columns.ok_or_else(|| Error::invariant("csv without header row"))?,
        rows,
    })
}

pub fn read_csv(path: &Path) -> Result<ParsedCsv> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_report_is_header_only() {
        let r = CsvReport::new("spectrum", &["rank", "value"]);
        assert_eq!(r.render(), "# schema=spectrum/1\nrank,value\n");
    }

    #[test]
    fn columns_and_comments_keep_order() {
        let mut r = CsvReport::new("x", &["b", "a"]);
        r.comment("c=6");
        r.push(vec![1usize.into(), 0.5.into()]);
        let p = parse_csv(&r.render()).unwrap();
        assert_eq!(p.schema, "x/1");
        assert_eq!(p.columns, vec!["b", "a"]);
        assert_eq!(p.rows, vec![vec!["1".to_string(), "0.5".to_string()]]);
    }

    #[test]
    fn non_finite_values_render() {
        let mut r = CsvReport::new("x", &["v"]);
        r.push(vec![f64::NAN.into()]);
        r.push(vec![f64::INFINITY.into()]);
        let p = parse_csv(&r.render()).unwrap();
        assert!(p.float(0, "v").unwrap().is_nan());
        assert_eq!(p.float(1, "v").unwrap(), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bit_exactly(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let mut r = CsvReport::new("rt", &["v"]);
            r.push(vec![v.into()]);
            let p = parse_csv(&r.render()).unwrap();
            prop_assert_eq!(p.float(0, "v").unwrap().to_bits(), v.to_bits());
        }
    }
}
