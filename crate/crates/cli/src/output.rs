//! Tabular output shared by every subcommand.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One field of an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Num)
    }

    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => fmt_num(*v),
            Cell::Num(_) | Cell::Null => "null".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => json_string(s),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// A table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()?;
            }
            Format::Json => {
                writeln!(out, "[")?;
                for (i, row) in self.rows.iter().enumerate() {
                    let sep = if i + 1 < self.rows.len() { "," } else { "" };
                    writeln!(out, "  {}{sep}", self.object(row))?;
                }
                writeln!(out, "]")?;
            }
        }
        Ok(())
    }

    /// A single row as a JSON object (CSV falls back to the table form).
    pub fn write_single(&self, out: &mut dyn Write, format: Format) -> Result<(), CliError> {
        match (format, self.rows.as_slice()) {
            (Format::Json, [row]) => {
                writeln!(out, "{}", self.object(row))?;
                Ok(())
            }
            _ => self.write(out, format),
        }
    }

    fn object(&self, row: &[Cell]) -> String {
        let fields: Vec<String> = self
            .columns
            .iter()
            .zip(row)
            .map(|(k, v)| format!("{}: {}", json_string(k), v.json()))
            .collect();
        format!("{{{}}}", fields.join(", "))
    }
}

/// Stdout or the file named by `--output`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}
