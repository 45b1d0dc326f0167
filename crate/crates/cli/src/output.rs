//! Deterministic CSV and JSON writers. All floats are written as
//! fixed-precision scientific notation with 17 significant digits, so two
//! runs with the same config produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use trs_core::response::{ComparisonReport, ResponseTrace};

use crate::config::RunConfig;
use crate::CliError;

/// Frozen trace column set.
pub const TRACE_HEADER: &str =
    "t_tilde,reA,imA,absA,phase_principal,phase_unwrapped,mu,intensity";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_trace_csv(path: &Path, trace: &ResponseTrace) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(w, "{TRACE_HEADER}").map_err(io_err(path))?;
    for k in 0..trace.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(trace.grid().value(k)),
            fmt(trace.a[k].re),
            fmt(trace.a[k].im),
            fmt(trace.amplitude[k]),
            fmt(trace.phase_principal[k]),
            fmt(trace.phase_unwrapped[k]),
            fmt(trace.mu[k]),
            fmt(trace.intensity[k]),
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Single-run report: the comparison metrics plus the resolved config and
/// code version.
#[derive(Serialize)]
pub struct ReportDocument<'a> {
    pub code_version: &'a str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub report: &'a ComparisonReport,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// One sweep point: either a report or the error that produced none.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "value,amplitude_ratio_21,phase_offset_21,rise_time_1,rise_time_2";

pub fn write_sweep_csv(path: &Path, points: &[SweepPoint]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    writeln!(w, "{SWEEP_HEADER}").map_err(io_err(path))?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for p in points {
        match &p.report {
            Some(r) => writeln!(
                w,
                "{},{},{},{},{}",
                fmt(p.value),
                fmt(r.amplitude_ratio_21),
                fmt(r.phase_offset_21),
                opt(r.rise_time_1),
                opt(r.rise_time_2),
            ),
            None => writeln!(w, "{},,,,", fmt(p.value)),
        }
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
