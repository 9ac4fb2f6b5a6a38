use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::{ResultRow, TraceRow};

pub const RESULT_HEADER: [&str; 11] = [
    "scenario_id",
    "realization_index",
    "seed",
    "sweep_value",
    "scheme",
    "csi_mode",
    "rate_bps_hz",
    "iterations",
    "converged",
    "channel_power",
    "mse_empirical",
];

pub const TRACE_HEADER: [&str; 7] = [
    "scenario_id",
    "realization_index",
    "seed",
    "sweep_value",
    "init",
    "iteration",
    "rate_bps_hz",
];

/// Shortest representation that parses back to the same `f64`.
fn float(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.realization_index.to_string(),
            r.seed.to_string(),
            float(r.sweep_value),
            r.scheme.to_string(),
            r.csi_mode.to_string(),
            float(r.rate_bps_hz),
            r.iterations.to_string(),
            r.converged.to_string(),
            float(r.channel_power),
            r.mse_empirical.map(float).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            r.realization_index.to_string(),
            r.seed.to_string(),
            float(r.sweep_value),
            r.init.clone(),
            r.iteration.to_string(),
            float(r.rate_bps_hz),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn to_file(path: &Path, write: impl FnOnce(std::fs::File) -> csv::Result<()>) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write(file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes result rows to `path` with a header line.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    to_file(path, |f| write_csv(rows, f))
}

/// Writes trace rows to `path` with a header line.
pub fn emit_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    to_file(path, |f| write_trace_csv(rows, f))
}
