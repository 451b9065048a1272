//! Tabular datasets with a binary label, and their CSV form.
//!
//! The CSV header lists the feature names followed by `label`. Column kinds
//! are not part of the CSV; on load a column whose values are all small
//! non-negative integers (at most [`MAX_INFERRED_LEVELS`] distinct values) is
//! treated as categorical, everything else as continuous.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const LABEL_COLUMN: &str = "label";
pub const MAX_INFERRED_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    Categorical { levels: usize },
}

impl ColumnKind {
    pub fn is_categorical(self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn continuous(name: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Continuous,
        }
    }

    pub fn categorical(name: impl Into<String>, levels: usize) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Categorical { levels },
        }
    }
}

/// Feature matrix (rows = subjects) with per-column metadata and a 0/1 label.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    x: DMatrix<f64>,
    y: Vec<u8>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, x: DMatrix<f64>, y: Vec<u8>) -> Result<Self> {
        if columns.len() != x.ncols() {
            return Err(Error::Schema(format!(
                "{} column descriptions for {} feature columns",
                columns.len(),
                x.ncols()
            )));
        }
        if y.len() != x.nrows() {
            return Err(Error::Schema(format!(
                "{} labels for {} rows",
                y.len(),
                x.nrows()
            )));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::Schema(format!("label {bad} is not 0 or 1")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema("feature matrix has missing or non-finite values".into()));
        }
        Ok(Dataset { columns, x, y })
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&v| v == 1).count()
    }

    pub fn positive_rate(&self) -> f64 {
        self.positives() as f64 / self.nrows() as f64
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Rows in the given order (indices may repeat).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let x = self.x.select_rows(rows);
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Dataset {
            columns: self.columns.clone(),
            x,
            y,
        }
    }

    /// Replaces one feature column; used by permutation procedures.
    pub fn with_column(&self, j: usize, values: &[f64]) -> Dataset {
        let mut out = self.clone();
        out.x.set_column(j, &DVector::from_column_slice(values));
        out
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        self.x.column(j).iter().copied().collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|c| quote_field(&c.name))
            .chain(std::iter::once(LABEL_COLUMN.to_string()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                let _ = write!(out, "{},", self.x[(i, j)]);
            }
            let _ = writeln!(out, "{}", self.y[i]);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&text).map_err(|e| match e {
            Error::Schema(message) => Error::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_csv_str(text: &str) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Schema(e.to_string()))?
            .clone();
        let label_at = header
            .iter()
            .position(|h| h == LABEL_COLUMN)
            .ok_or_else(|| Error::Schema(format!("no `{LABEL_COLUMN}` column")))?;
        let names: Vec<String> = header
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != label_at)
            .map(|(_, h)| h.to_string())
            .collect();
        let d = names.len();

        let mut values = Vec::new();
        let mut labels = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Schema(e.to_string()))?;
            for (k, field) in record.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Schema(format!("row {}: `{field}` is not a number", line + 2))
                })?;
                if k == label_at {
                    if v != 0.0 && v != 1.0 {
                        return Err(Error::Schema(format!(
                            "row {}: label `{field}` is not 0 or 1",
                            line + 2
                        )));
                    }
                    labels.push(v as u8);
                } else {
                    values.push(v);
                }
            }
        }
        let n = labels.len();
        let x = DMatrix::from_row_slice(n, d, &values);
        let columns = names
            .into_iter()
            .enumerate()
            .map(|(j, name)| Column {
                kind: infer_kind(x.column(j).iter().copied()),
                name,
            })
            .collect();
        Dataset::new(columns, x, labels)
    }
}

fn infer_kind(values: impl Iterator<Item = f64>) -> ColumnKind {
    let mut seen = Vec::new();
    for v in values {
        if v < 0.0 || v.fract() != 0.0 {
            return ColumnKind::Continuous;
        }
        if !seen.contains(&v) {
            seen.push(v);
            if seen.len() > MAX_INFERRED_LEVELS {
                return ColumnKind::Continuous;
            }
        }
    }
    let levels = seen.iter().fold(0.0f64, |m, &v| m.max(v)) as usize + 1;
    ColumnKind::Categorical { levels }
}

fn quote_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows of `x` restricted to a list of named columns, in that order.
pub fn align_columns(data: &Dataset, names: &[String]) -> Result<DMatrix<f64>> {
    if data.ncols() != names.len() {
        return Err(Error::Schema(format!(
            "model expects {} features, data has {}",
            names.len(),
            data.ncols()
        )));
    }
    for (j, (have, want)) in data.columns.iter().zip(names).enumerate() {
        if &have.name != want {
            return Err(Error::Schema(format!(
                "column {j} is `{}`, model expects `{want}`",
                have.name
            )));
        }
    }
    Ok(data.x.clone())
}
