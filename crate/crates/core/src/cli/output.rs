//! Report envelope and the JSON/CSV writers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HvError, Result};

pub const SCHEMA: &str = "hvlab-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One CSV cell. Numbers print with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
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

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// A finished command: its resolved config, structured result and flat table.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub table: Table,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'a str,
    command: &'a str,
    config: &'a Value,
    result: &'a Value,
}

/// A report read back from disk.
#[derive(Debug, Clone, Deserialize)]
pub struct ParsedReport {
    pub schema: String,
    pub command: String,
    pub config: Value,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let env = Envelope {
            schema: SCHEMA,
            command: self.command,
            config: &self.config,
            result: &self.result,
        };
        serde_json::to_string_pretty(&env).expect("report serializes") + "\n"
    }

    /// A `#` comment line with the schema, command and config, then the table.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# {SCHEMA} {} {}\n",
            self.command,
            serde_json::to_string(&self.config).expect("config serializes")
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.table.header).expect("in-memory write");
        for row in &self.table.rows {
            w.write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells"),
        );
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub fn parse_report(text: &str, path: &std::path::Path) -> Result<ParsedReport> {
    let r: ParsedReport = serde_json::from_str(text).map_err(|e| HvError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if r.schema != SCHEMA {
        return Err(HvError::Parse {
            path: path.to_path_buf(),
            message: format!(
                "unsupported report schema `{}` (expected `{SCHEMA}`)",
                r.schema
            ),
        });
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_through_csv_text() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 0.0, -7.25e10] {
            let s = Cell::Num(x).render();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn csv_has_comment_header_and_rows() {
        let mut table = Table::new(&["a", "p"]);
        table.push(vec![0.0.into(), 0.25.into()]);
        let r = Report {
            command: "joint",
            config: serde_json::json!({"k": 1}),
            result: Value::Null,
            table,
        };
        let text = r.to_csv();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# hvlab-report/1 joint {\"k\":1}");
        assert_eq!(lines[1], "a,p");
        assert_eq!(lines[2], "0.0000000000000000e0,2.5000000000000000e-1");
    }
}
