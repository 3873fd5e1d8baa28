//! CSV tables, run metadata and plot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(i64::from(x))
    }
}

/// 17 significant digits, locale-independent.
fn format_cell(c: Cell) -> String {
    match c {
        Cell::Float(x) if x.is_nan() => "nan".into(),
        Cell::Float(x) => format!("{x:.16e}"),
        Cell::Int(i) => i.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&c| format_cell(c)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// How the generated gnuplot script draws the table.
pub enum Plot {
    /// Columns `first..=last` (1-based) against column 1.
    Lines { first: usize, last: usize, xlabel: String, ylabel: String },
    /// Heat map of column `z` over columns 1 and 2.
    Map { z: usize, xlabel: String, ylabel: String, title: String },
}

pub fn gnuplot_script(csv: &Path, plot: &Plot) -> String {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::from("set datafile separator ','\nset key noautotitle\n");
    match plot {
        Plot::Lines { first, last, xlabel, ylabel } => {
            let _ = writeln!(s, "set xlabel '{xlabel}'\nset ylabel '{ylabel}'");
            let _ = writeln!(s, "plot for [i={first}:{last}] '{name}' skip 1 using 1:i with lines lc rgb 'black'");
        }
        Plot::Map { z, xlabel, ylabel, title } => {
            let _ = writeln!(s, "set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset title '{title}'");
            let _ = writeln!(s, "set view map\nsplot '{name}' skip 1 using 1:2:{z} with points pt 5 ps 0.5 palette");
        }
    }
    s.push_str("pause mouse close\n");
    s
}

/// Files written so far; removed again unless `commit` is called.
pub struct Outputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    pub fn new() -> Self {
        Self { written: Vec::new(), committed: false }
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        fs::write(path, contents).map_err(|e| CliError::Io(format!("out: cannot write {}: {e}", path.display())))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
