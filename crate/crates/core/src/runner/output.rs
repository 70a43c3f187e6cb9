//! CSV tables with `#` metadata lines, written via a temp file and rename.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Largest top-level Fock population seen in any column group.
    pub max_leakage: f64,
    /// Leakage of the exact or dissipative reference run, if the table has one.
    pub reference_leakage: Option<f64>,
    pub leakage_threshold: f64,
}

impl Table {
    pub fn new(file_name: impl Into<String>, columns: Vec<String>, leakage_threshold: f64) -> Self {
        Table {
            file_name: file_name.into(),
            metadata: Vec::new(),
            columns,
            rows: Vec::new(),
            max_leakage: 0.0,
            reference_leakage: None,
            leakage_threshold,
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: row.len(),
            });
        }
        if let Some(i) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "{}: non-finite value in column {}",
                self.file_name, self.columns[i]
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn note_leakage(&mut self, leakage: f64, reference: bool) {
        self.max_leakage = self.max_leakage.max(leakage);
        if reference {
            let r = self.reference_leakage.get_or_insert(0.0);
            *r = r.max(leakage);
        }
    }

    pub fn leakage_exceeded(&self) -> bool {
        self.max_leakage > self.leakage_threshold
    }

    pub fn reference_leakage_exceeded(&self) -> bool {
        self.reference_leakage
            .is_some_and(|l| l > self.leakage_threshold)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let v = v.replace(['\n', '\r'], " ");
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "# leakage_threshold: {}", fmt_num(self.leakage_threshold));
        let _ = writeln!(out, "# max_leakage: {}", fmt_num(self.max_leakage));
        let flag = if self.leakage_exceeded() { "exceeded" } else { "ok" };
        let _ = writeln!(out, "# leakage_flag: {flag}");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<dir>/<file_name>` atomically and returns the final path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(&self.file_name);
        let tmp = dir.join(format!(".{}.tmp", self.file_name));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_csv().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses a table written by [`Table::to_csv`] back into metadata, header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>)> {
    let mut meta = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ") {
                meta.push((k.to_string(), v.to_string()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(str::to_string).collect()),
            Some(h) => {
                let row = line
                    .split(',')
                    .map(|c| {
                        c.parse::<f64>()
                            .map_err(|e| Error::Config(format!("bad number {c:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if row.len() != h.len() {
                    return Err(Error::DimensionMismatch {
                        expected: h.len(),
                        found: row.len(),
                    });
                }
                rows.push(row);
            }
        }
    }
    Ok((meta, header.unwrap_or_default(), rows))
}
