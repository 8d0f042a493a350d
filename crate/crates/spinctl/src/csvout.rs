//! Minimal CSV emission: comma separated, LF line endings, floats in
//! Rust's shortest round-trip decimal form.

use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// In-memory CSV table; written in one call so files never appear
/// half-finished.
pub struct Csv {
    buffer: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&header.join(","));
        buffer.push('\n');
        Csv { buffer, columns: header.len() }
    }

    pub fn row(&mut self, fields: &[CsvField]) {
        assert_eq!(fields.len(), self.columns, "row width does not match header");
        for (i, field) in fields.iter().enumerate() {
            if i > 0 {
                self.buffer.push(',');
            }
            match field {
                CsvField::Int(v) => {
                    let _ = write!(self.buffer, "{v}");
                }
                CsvField::Float(v) => {
                    let _ = write!(self.buffer, "{v}");
                }
                CsvField::Str(v) => self.buffer.push_str(v),
            }
        }
        self.buffer.push('\n');
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.buffer.as_bytes())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

pub enum CsvField<'a> {
    Int(u64),
    Float(f64),
    Str(&'a str),
}

impl From<usize> for CsvField<'_> {
    fn from(v: usize) -> Self {
        CsvField::Int(v as u64)
    }
}

impl From<f64> for CsvField<'_> {
    fn from(v: f64) -> Self {
        CsvField::Float(v)
    }
}

impl<'a> From<&'a str> for CsvField<'a> {
    fn from(v: &'a str) -> Self {
        CsvField::Str(v)
    }
}
