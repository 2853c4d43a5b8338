//! Row serialization: CSV (with header) or JSON lines.
//!
//! Every mode emits a flat, schema-stable row type. Missing values (for
//! example the dark drive outside its domain) are `Option`s and come out as
//! an empty CSV field / JSON `null`, never as NaN text.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::AppError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn from_name(name: &str) -> Result<Self, AppError> {
        match name {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(AppError::Config(format!(
                "unknown output format \"{other}\" (expected csv or jsonl)"
            ))),
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, AppError> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| {
                AppError::Runtime(format!("cannot create {}: {e}", p.display()))
            })?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Write `rows` to `path` (stdout when `None`) in the requested format.
///
/// Lines are `\n`-terminated and field order follows the row struct, so a
/// repeated run over the same inputs produces byte-identical output.
pub fn write_rows<T: Serialize>(
    rows: &[T],
    path: Option<&Path>,
    format: Format,
) -> Result<(), AppError> {
    let io_err = |e: io::Error| AppError::Runtime(format!("write failed: {e}"));
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink(path)?);
            for row in rows {
                w.serialize(row)
                    .map_err(|e| AppError::Runtime(format!("write failed: {e}")))?;
            }
            w.flush().map_err(io_err)?;
        }
        Format::Jsonl => {
            let mut w = sink(path)?;
            for row in rows {
                let line = serde_json::to_string(row)
                    .map_err(|e| AppError::Runtime(format!("serialize failed: {e}")))?;
                writeln!(w, "{line}").map_err(io_err)?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

/// Replace non-finite readouts by `None` so they serialize as empty/null.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
