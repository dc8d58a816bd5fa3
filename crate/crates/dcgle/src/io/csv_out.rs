//! CSV artifacts and their metadata sidecars.
//!
//! Every scenario emits tables through [`CsvArtifact`] so that the on-disk
//! format is decided in exactly one place: LF line endings, '.' decimal
//! separator, floats printed with 17 significant digits so the binary value
//! round-trips, and a `<name>.meta.txt` sidecar carrying the fully resolved
//! configuration next to every table.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::ScenarioError;

/// One CSV value. Floats are written as `{:.16e}` (17 significant digits,
/// enough to reproduce the f64 bit pattern on read-back); integers as plain
/// decimals. Non-finite floats appear as `NaN`, `inf`, `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cell::Float(x) => {
                if x.is_finite() {
                    write!(f, "{x:.16e}")
                } else if x.is_nan() {
                    write!(f, "NaN")
                } else if x > 0.0 {
                    write!(f, "inf")
                } else {
                    write!(f, "-inf")
                }
            }
            Cell::Int(n) => write!(f, "{n}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(n: i64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as i64)
    }
}

impl From<u8> for Cell {
    fn from(n: u8) -> Self {
        Cell::Int(n as i64)
    }
}

/// An in-memory CSV table: name (becomes `<name>.csv`), header, rows.
#[derive(Debug, Clone)]
pub struct CsvArtifact {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvArtifact {
    /// `name` must be a bare file stem (no path separators, no extension).
    pub fn new(name: &str, columns: &[&str]) -> Self {
        assert!(
            !name.is_empty() && !name.contains(['/', '\\', '.']),
            "artifact name must be a bare file stem, got {name:?}"
        );
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// The full file content: header line then one line per row, joined by
    /// `\n` with a trailing newline. Deterministic for identical inputs.
    pub fn csv_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&cell.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Write `<dir>/<name>.csv` and `<dir>/<name>.meta.txt`, creating the
    /// directory if needed. Returns the CSV path.
    pub fn write(&self, dir: &Path, meta: &Metadata) -> Result<PathBuf, ScenarioError> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        fs::write(&csv_path, self.csv_text())?;
        let meta_path = dir.join(format!("{}.meta.txt", self.name));
        fs::write(&meta_path, meta.render(&self.name, self.rows.len()))?;
        Ok(csv_path)
    }
}

/// Provenance written next to every table: tool version, wall time, ok/FAILED
/// status, free-form notes, and the resolved configuration that produced it.
#[derive(Debug, Clone)]
pub struct Metadata {
    /// Serialized configuration with every default filled in; parsing it
    /// back reproduces the run exactly.
    pub resolved_config: String,
    pub wall_time: Duration,
    /// `Some(reason)` marks a run that aborted after flushing partial data.
    pub failed: Option<String>,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(resolved_config: String) -> Self {
        Self {
            resolved_config,
            wall_time: Duration::ZERO,
            failed: None,
            notes: Vec::new(),
        }
    }

    fn render(&self, name: &str, n_rows: usize) -> String {
        let mut out = String::new();
        out.push_str(&format!("# metadata for {name}.csv\n"));
        out.push_str(&format!("tool_version = {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("rows = {n_rows}\n"));
        out.push_str(&format!(
            "wall_time_seconds = {:.3}\n",
            self.wall_time.as_secs_f64()
        ));
        match &self.failed {
            Some(reason) => out.push_str(&format!("status = FAILED: {reason}\n")),
            None => out.push_str("status = ok\n"),
        }
        for note in &self.notes {
            out.push_str(&format!("note = {note}\n"));
        }
        out.push_str("\n# resolved configuration\n");
        out.push_str(&self.resolved_config);
        if !self.resolved_config.ends_with('\n') {
            out.push('\n');
        }
        out
    }
}
