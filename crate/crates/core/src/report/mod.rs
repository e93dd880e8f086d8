//! Deterministic CSV reports and the four command entry points.
//!
//! Every report starts with `# key=value` metadata rows holding the fully
//! resolved configuration, then one column header row, then data rows.
//! Floats are written as `{:.8e}` (nine significant digits), so repeated
//! runs with equal inputs produce byte-identical files.

mod cli;
mod compare;
mod formulas;
mod markov_cmd;
mod sim;

use std::fmt;

pub use cli::{run_cli, Cli, Command, CompareArgs, FormulaArgs, MarkovArgs, SimArgs};
pub use compare::cmd_compare;
pub use formulas::{cmd_formulas, parse_grid};
pub use markov_cmd::cmd_markov;
pub use sim::cmd_sim;

/// Process exit status. Codes are stable and documented in the README.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Io = 1,
    Parse = 2,
    Solver = 3,
    Dead = 4,
    GoldenMismatch = 5,
    Exhausted = 6,
    Domain = 7,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A failed command: nothing to write but a message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdError {
    pub status: Status,
    pub message: String,
}

impl CmdError {
    pub fn new(status: Status, message: impl Into<String>) -> Self {
        CmdError {
            status,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CmdError::new(Status::Parse, message)
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CmdError {}

/// A finished command: the report, a short human summary and the status
/// the process should exit with (non-zero statuses still carry a report).
#[derive(Debug, Clone, PartialEq)]
pub struct CmdOutput {
    pub report: CsvReport,
    pub summary: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvReport {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvReport {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        CsvReport {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    /// # Panics
    /// If the row width differs from the header.
    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Cell of `row` under `column`.
    pub fn cell(&self, row: usize, column: &str) -> Option<&str> {
        let c = self.columns.iter().position(|name| name == column)?;
        self.rows.get(row).map(|r| r[c].as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 fields"));
        out
    }
}

/// Nine-significant-digit scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

/// Parses a `lo..hi` range of positive numbers with `lo < hi`.
fn parse_range(text: &str) -> Result<(f64, f64), CmdError> {
    let bad = || CmdError::parse(format!("expected a range `lo..hi` with 0 < lo < hi, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    if lo > 0.0 && lo < hi && hi.is_finite() {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

fn meta_config(report: &mut CsvReport, config: &crate::pipeline::CoreConfig) {
    for (k, v) in config.entries() {
        report.meta(format!("config.{k}"), v);
    }
}
