use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Column {
    /// Header, with the unit as a suffix (`_ns`, `_hz`, `_1`).
    pub name: &'static str,
    pub description: &'static str,
}

pub const fn col(name: &'static str, description: &'static str) -> Column {
    Column { name, description }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // shortest round-trip form, identical on every platform
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c.name == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(self.columns.iter().map(|c| c.name)).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Result of one experiment before it is written out.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: Table,
    /// Experiment settings after defaults and overrides.
    pub settings: Value,
    /// Headline numbers.
    pub summary: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a> {
    pub experiment: &'a str,
    pub version: &'static str,
    pub seed: u64,
    pub wall_time_s: f64,
    pub preset: &'a str,
    pub system: Value,
    pub settings: &'a Value,
    pub columns: &'a [Column],
    pub summary: &'a Value,
}

pub fn write_outputs(dir: &Path, name: &str, table: &Table, meta: &Meta) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let csv_path = dir.join(format!("{name}.csv"));
    let meta_path = dir.join(format!("{name}.meta.json"));
    table.write_csv(&csv_path)?;
    let text = serde_json::to_string_pretty(meta).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&meta_path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", meta_path.display())))?;
    Ok((csv_path, meta_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_cells() {
        assert_eq!(Cell::Num(0.1).render(), "0.1");
        assert_eq!(Cell::Num(1.0).render(), "1.0");
        assert_eq!(Cell::from(3usize).render(), "3");
        assert_eq!(Cell::from(String::from("a b")).render(), "a b");
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_checked() {
        let mut t = Table::new(vec![col("a", ""), col("b", "")]);
        t.push(vec![Cell::Int(1)]);
    }

    #[test]
    fn column_lookup() {
        let mut t = Table::new(vec![col("a", ""), col("b", "")]);
        t.push(vec![Cell::Int(1), Cell::Int(2)]);
        assert!(matches!(t.column("b").unwrap()[0], Cell::Int(2)));
        assert!(t.column("c").is_none());
    }
}
