//! Deterministic CSV and JSON emission.
//!
//! CSV output follows RFC 4180: CRLF line endings, a mandatory header row,
//! quoting only where needed. Floats use Rust's shortest round-trip
//! formatting, so identical runs produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};

fn csv_field(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') || raw.contains('\r') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Render rows as an RFC 4180 document.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(
        &header
            .iter()
            .map(|h| csv_field(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push_str("\r\n");
    for row in rows {
        out.push_str(
            &row.iter()
                .map(|f| csv_field(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str("\r\n");
    }
    out
}

/// Write a document to a path, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)
                        .map_err(|e| CliError::runtime(format!("creating {parent:?}: {e}")))?;
                }
            }
            fs::write(p, contents).map_err(|e| CliError::runtime(format!("writing {p:?}: {e}")))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| CliError::runtime(format!("writing stdout: {e}")))
        }
    }
}

/// Pretty JSON with a trailing newline (struct fields keep declaration
/// order, so output is stable).
pub fn json_document<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("serializing: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::schema(format!("reading {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::schema(format!("parsing {path:?}: {e}")))
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}
