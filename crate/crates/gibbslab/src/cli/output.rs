//! Report emission: CSV and JSON with stable layout.
//!
//! CSV uses `,` separators, `.` decimals, LF line endings, and floats with
//! 17 significant digits. JSON is pretty-printed with the struct field
//! order, and floats round-trip exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

/// Write `text` to the path, or to stdout when no path is given.
pub fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            f.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

pub fn csv_text(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

pub fn json_text<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Output format for commands that support both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}
