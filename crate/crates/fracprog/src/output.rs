//! CSV and summary writers.

use std::fs;
use std::path::Path;

use serde::Serialize;

use fracprog_core::solver::IterationTrace;

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct TraceRow {
    iter: usize,
    objective: f64,
    wall_ms: f64,
    inner_iters: usize,
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Rows of any serializable record type, header taken from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `iter,objective,wall_ms,inner_iters`, one row per trace record.
pub fn write_trace(path: &Path, trace: &IterationTrace) -> Result<()> {
    let rows: Vec<TraceRow> = trace
        .records
        .iter()
        .map(|r| TraceRow { iter: r.outer_index, objective: r.objective, wall_ms: r.wall_ms, inner_iters: r.inner_iterations })
        .collect();
    write_rows(path, &rows)
}

pub fn write_summary<T: Serialize>(path: &Path, summary: &T) -> Result<()> {
    let text = toml::to_string(summary).map_err(|e| CliError::Invariant(format!("summary not serializable: {e}")))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Serialize)]
pub struct BaselineRow {
    pub method: String,
    pub value: f64,
}

pub fn write_baselines(path: &Path, rows: &[(&str, f64)]) -> Result<()> {
    let rows: Vec<BaselineRow> = rows.iter().map(|(m, v)| BaselineRow { method: m.to_string(), value: *v }).collect();
    write_rows(path, &rows)
}
