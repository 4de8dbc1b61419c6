//! CSV rows and writers.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use berkdyn::scalar::LogReal;
use serde::Serialize;

use crate::error::CliError;

pub const CSV_HEADER: [&str; 9] = ["map", "target", "point", "n", "quantity", "value", "value_exact", "error_radius", "note"];

/// One output line. Floats are pre-formatted so `inf`/`nan` print predictably.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub map: String,
    pub target: String,
    pub point: String,
    pub n: Option<u32>,
    pub quantity: String,
    pub value: String,
    pub value_exact: String,
    pub error_radius: String,
    pub note: String,
}

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Builds rows that share the map and target columns.
#[derive(Clone, Debug)]
pub struct RowCtx {
    pub map: String,
    pub target: String,
}

impl RowCtx {
    pub fn row(&self, point: &str, n: Option<u32>, quantity: &str, value: f64) -> Row {
        Row {
            map: self.map.clone(),
            target: self.target.clone(),
            point: point.to_string(),
            n,
            quantity: quantity.to_string(),
            value: fmt_f64(value),
            value_exact: String::new(),
            error_radius: "0".into(),
            note: String::new(),
        }
    }

    /// A log-scale value; exact values also fill `value_exact`.
    pub fn log_row(&self, point: &str, n: Option<u32>, quantity: &str, v: &LogReal, error: f64) -> Row {
        let mut r = self.row(point, n, quantity, v.to_f64());
        r.value_exact = v.exact_repr().unwrap_or_default();
        r.error_radius = fmt_f64(error);
        r
    }
}

impl Row {
    pub fn exact(mut self, text: impl Into<String>) -> Row {
        self.value_exact = text.into();
        self
    }

    pub fn error(mut self, e: f64) -> Row {
        self.error_radius = fmt_f64(e);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Row {
        self.note = text.into();
        self
    }
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(File::create(path)?));
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}
