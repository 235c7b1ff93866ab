//! CSV tables, one file per observable, with units in the header.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::RunError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// File stem, e.g. `trajectory`.
    pub name: String,
    /// Column names carry their unit as a suffix (`t_s`, `rate_per_s`).
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn with_columns(name: impl Into<String>, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    /// Values of one numeric column; unparsable cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| r[i].parse().ok()).collect())
    }
}

/// Shortest round-trip representation; empty for non-finite values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Everything an experiment produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Key/value pairs written to `<prefix>_summary.csv`.
    pub summary: Vec<(String, String)>,
    pub warnings: Vec<String>,
    /// Binary side files (checkpoints), written as `<prefix>_<name>`.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn add_summary(&mut self, key: &str, value: impl Into<String>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Prefixes every table, summary key and warning, for sweeps.
    pub fn absorb(&mut self, tag: &str, other: Report) {
        for mut t in other.tables {
            t.name = format!("{tag}_{}", t.name);
            self.tables.push(t);
        }
        for (k, v) in other.summary {
            self.summary.push((format!("{tag}.{k}"), v));
        }
        for w in other.warnings {
            self.warnings.push(format!("{tag}: {w}"));
        }
        for (n, b) in other.files {
            self.files.push((format!("{tag}_{n}"), b));
        }
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new("summary", &["key", "value"]);
        for (k, v) in &self.summary {
            t.push(vec![k.clone(), v.clone()]);
        }
        t
    }
}

pub fn write_table(dir: &Path, prefix: &str, table: &Table) -> Result<PathBuf, RunError> {
    let path = dir.join(format!("{prefix}_{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::io(&path, e.into()))?;
    w.write_record(&table.columns).map_err(|e| RunError::io(&path, e.into()))?;
    for r in &table.rows {
        w.write_record(r).map_err(|e| RunError::io(&path, e.into()))?;
    }
    w.flush().map_err(|e| RunError::io(&path, e))?;
    Ok(path)
}

/// A gnuplot script plotting every column of `table` against the first.
pub fn gnuplot_stub(csv_name: &str, table: &Table) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel '{}'", table.columns.first().map_or("", |c| c.as_str()));
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{}.png'", csv_name.trim_end_matches(".csv"));
    let series: Vec<String> =
        (2..=table.columns.len()).map(|i| format!("'{csv_name}' using 1:{i} with linespoints")).collect();
    if series.is_empty() {
        let _ = writeln!(s, "# single-column table, nothing to plot");
    } else {
        let _ = writeln!(s, "plot {}", series.join(", \\\n     "));
    }
    s
}

/// Writes all tables plus the summary; returns the written paths.
pub fn write_report(dir: &Path, prefix: &str, report: &Report, gnuplot: bool) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut paths = Vec::new();
    for t in report.tables.iter().chain(std::iter::once(&report.summary_table())) {
        let p = write_table(dir, prefix, t)?;
        if gnuplot && t.name != "summary" {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let gp = p.with_extension("gp");
            std::fs::write(&gp, gnuplot_stub(&name, t)).map_err(|e| RunError::io(&gp, e))?;
            paths.push(gp);
        }
        paths.push(p);
    }
    for (name, bytes) in &report.files {
        let p = dir.join(format!("{prefix}_{name}"));
        std::fs::write(&p, bytes).map_err(|e| RunError::io(&p, e))?;
        paths.push(p);
    }
    Ok(paths)
}
