//! CSV and JSON Lines writers shared by the sweep and the CLI.
//!
//! Numbers are rounded to 12 significant digits and printed in the shortest
//! form that reproduces the rounded value, so output is byte-stable across
//! runs and thread counts. Non-finite values are the tokens `inf`, `-inf`
//! and `nan`; in JSON Lines they are strings because JSON has no such literals.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format_number(*x),
            Cell::Num(x) => format!("\"{}\"", format_number(*x)),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
            Cell::Empty => "null".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            _ => Err(crate::Error::InvalidSpec(format!("unknown output format {s:?} (expected csv or jsonl)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// A one-row table from `(column, value)` pairs.
    pub fn single(pairs: Vec<(&str, Cell)>) -> Self {
        let (cols, row): (Vec<&str>, Vec<Cell>) = pairs.into_iter().unzip();
        let mut t = Self::new(cols);
        t.rows.push(row);
        t
    }

    pub fn write<W: Write>(&self, format: Format, w: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Jsonl => self.write_jsonl(w),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(Cell::csv_field))?;
        }
        wr.flush()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        let keys: Vec<String> =
            self.columns.iter().map(|c| serde_json::to_string(c).expect("string serializes")).collect();
        for row in &self.rows {
            let fields: Vec<String> = keys.iter().zip(row).map(|(k, v)| format!("{k}:{}", v.json_value())).collect();
            writeln!(w, "{{{}}}", fields.join(","))?;
        }
        w.flush()
    }
}
