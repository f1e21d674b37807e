//! Plot-ready result files.
//!
//! Every experiment emits [`OutputTable`]s: one curve or sweep per table,
//! numeric columns only.  The writer renders each table to a plain-text
//! file whose `#`-prefixed header makes it self-describing — tool
//! version, scenario label, configuration hash, seed, column names and
//! units, free-form context lines, and the complete resolved
//! configuration the run used.  Rendering is fully deterministic: the
//! same table and stamp always produce the same bytes, so output files
//! can be compared byte for byte across runs and worker counts.
//!
//! Values are written in shortest round-trip scientific notation; any
//! plotting tool that skips `#` comment lines (gnuplot, numpy, pandas)
//! reads the files directly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One named, unit-carrying column.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    /// Unit string; dimensionless columns use `"1"`.
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Column {
        Column { name: name.into(), unit: unit.into() }
    }
}

/// One result curve or sweep: a rectangular block of finite numbers plus
/// the metadata that explains it.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    /// File stem (the writer appends `.dat`).  Lowercase letters,
    /// digits, `_`, `-` and `.` only.
    pub name: String,
    /// The experiment that produced the table (`acf`, `ccf`, ...).
    pub experiment: String,
    /// Extra header lines, rendered as `# key: value`.
    pub context: Vec<(String, String)>,
    pub columns: Vec<Column>,
    /// Row-major data; every row has one value per column.
    pub rows: Vec<Vec<f64>>,
}

impl OutputTable {
    /// Check the table is well-formed: a safe file stem, at least one
    /// column and row, rectangular shape, and finite values throughout.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || "_-.".contains(c))
        {
            return Err(Error::arg(format!(
                "table name {:?} must be non-empty lowercase [a-z0-9_-.]",
                self.name
            )));
        }
        if self.columns.is_empty() {
            return Err(Error::arg(format!("table {:?} has no columns", self.name)));
        }
        if self.rows.is_empty() {
            return Err(Error::arg(format!("table {:?} has no rows", self.name)));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::arg(format!(
                    "table {:?} row {i} has {} values for {} columns",
                    self.name,
                    row.len(),
                    self.columns.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::arg(format!(
                    "table {:?} row {i} contains a non-finite value {v}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Run-wide header fields stamped into every file of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStamp {
    /// Tool name and version, e.g. `risim 0.1.0`.
    pub tool: String,
    /// Scenario label.
    pub label: String,
    /// First 16 hex digits of the resolved-configuration digest.
    pub config_hash: String,
    /// Effective master seed.
    pub seed: u64,
    /// Effective ensemble size of the correlation estimators.
    pub ensemble: usize,
    /// Effective reading of the cluster-evolution exponent.
    pub evolution_mode: String,
    /// Complete resolved configuration, TOML.
    pub resolved_config: String,
}

/// Render one table with its run stamp to the final file contents.
pub fn render_table(table: &OutputTable, stamp: &RunStamp) -> Result<String> {
    table.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", stamp.tool);
    let _ = writeln!(out, "# scenario: {}", stamp.label);
    let _ = writeln!(out, "# experiment: {}", table.experiment);
    let _ = writeln!(out, "# table: {}", table.name);
    let _ = writeln!(out, "# config hash: {}", stamp.config_hash);
    let _ = writeln!(out, "# seed: {}", stamp.seed);
    let _ = writeln!(out, "# ensemble: {}", stamp.ensemble);
    let _ = writeln!(out, "# evolution mode: {}", stamp.evolution_mode);
    for (key, value) in &table.context {
        let _ = writeln!(out, "# {key}: {value}");
    }
    let names: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
    let units: Vec<&str> = table.columns.iter().map(|c| c.unit.as_str()).collect();
    let _ = writeln!(out, "# columns: {}", names.join(" "));
    let _ = writeln!(out, "# units: {}", units.join(" "));
    let _ = writeln!(out, "# resolved config, one line per '# |':");
    for line in stamp.resolved_config.lines() {
        let _ = writeln!(out, "# | {line}");
    }
    for row in &table.rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{v:e}");
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

/// Write every table under `dir` as `<name>.dat`, creating the directory
/// if needed.  Returns the written paths in table order.
pub fn write_tables(
    tables: &[OutputTable],
    dir: impl AsRef<Path>,
    stamp: &RunStamp,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| Error::Output {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths = Vec::with_capacity(tables.len());
    for table in tables {
        let rendered = render_table(table, stamp)?;
        let path = dir.join(format!("{}.dat", table.name));
        std::fs::write(&path, rendered).map_err(|source| Error::Output {
            path: path.display().to_string(),
            source,
        })?;
        paths.push(path);
    }
    Ok(paths)
}
