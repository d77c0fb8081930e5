//! CSV tables: one `#` metadata line, a snake_case header, comma-separated
//! values printed like C's `%.12e`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    #[cfg(test)]
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match r[idx] {
                    Cell::Num(x) => x,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    pub fn render(&self, hash: &str) -> String {
        let mut out = format!("# tool=wgqed version={VERSION} scenario_sha256={hash}\n");
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&sci(*x)),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Empty => {}
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str, hash: &str) -> CliResult<PathBuf> {
        let path = dir.join(name);
        std::fs::write(&path, self.render(hash)).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

/// `%.12e`: twelve mantissa digits, signed exponent of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mut out = String::with_capacity(mantissa.len() + 5);
    out.push_str(mantissa);
    let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    out
}

/// Hex SHA-256 of a canonical scenario description.
pub fn scenario_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Snake-case column suffix for a parameter value, `0.125` -> `0p125`.
pub fn label(value: f64) -> String {
    format!("{value}").replace('-', "m").replace('.', "p")
}
