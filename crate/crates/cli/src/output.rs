//! CSV emission with a commented metadata header.
//!
//! Numbers are written with nine significant digits in scientific
//! notation so identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Nine significant digits, `.` decimal separator.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Avoid emitting `-0.00000000e0`.
        return format!("{:.8e}", 0.0);
    }
    format!("{x:.8e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Milliseconds to microseconds for time columns.
pub fn us(t_ms: f64) -> String {
    num(t_ms * 1e3)
}

pub fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// One output file, buffered in memory and written once.
pub struct Table {
    header: Vec<String>,
    buf: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[String], columns: &[&str]) -> Result<Self, CliError> {
        let mut buf = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        buf.write_record(columns).map_err(CliError::csv)?;
        Ok(Table {
            header: header.to_vec(),
            buf,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.buf.write_record(fields).map_err(CliError::csv)
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        let body = self.buf.into_inner().map_err(|e| CliError::csv(e.into_error().into()))?;
        let mut out = Vec::with_capacity(body.len() + 1024);
        for line in &self.header {
            out.extend_from_slice(b"# ");
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
        out.extend_from_slice(&body);
        Ok(out)
    }

    pub fn write_to(self, path: &Path) -> Result<(), CliError> {
        let bytes = self.into_bytes()?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }
}

/// `stem.csv` or `stem_suffix.csv`. A trailing `.csv` on the stem is dropped.
pub fn output_path(stem: &Path, suffix: Option<&str>) -> PathBuf {
    let mut s = stem.as_os_str().to_string_lossy().into_owned();
    if let Some(stripped) = s.strip_suffix(".csv") {
        s = stripped.to_string();
    }
    if let Some(suffix) = suffix {
        s.push('_');
        s.push_str(suffix);
    }
    s.push_str(".csv");
    PathBuf::from(s)
}
