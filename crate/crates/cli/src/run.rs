//! Orchestration of the `simulate` and `sweep` commands.

use std::path::PathBuf;

use rayon::prelude::*;

use trs_core::response::{compare, ComparisonReport};

use crate::config::{Axis, RunConfig};
use crate::output::{
    write_json, write_sweep_csv, write_trace_csv, ReportDocument, SweepPoint,
};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct SimulateArtifacts {
    pub report: ComparisonReport,
    pub trace_paths: [PathBuf; 2],
    pub report_path: PathBuf,
}

/// Compute both traces once each and the comparison report.
pub fn compute_report(cfg: &RunConfig) -> Result<ComparisonReport, CliError> {
    let sim = cfg.to_simulation()?;
    let out = sim.run()?;
    Ok(compare(
        &out.trace1,
        &out.trace2,
        cfg.stationarity_tol,
        cfg.tail_fraction,
    )?)
}

/// Run one simulation and write trace_case1.csv, trace_case2.csv and
/// report.json into the output directory.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimulateArtifacts, CliError> {
    let sim = cfg.to_simulation()?;
    let out = sim.run()?;
    let report = compare(
        &out.trace1,
        &out.trace2,
        cfg.stationarity_tol,
        cfg.tail_fraction,
    )?;

    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let trace1_path = dir.join("trace_case1.csv");
    let trace2_path = dir.join("trace_case2.csv");
    let report_path = dir.join("report.json");

    write_trace_csv(&trace1_path, &out.trace1)?;
    write_trace_csv(&trace2_path, &out.trace2)?;
    write_json(
        &report_path,
        &ReportDocument {
            code_version: VERSION,
            config: cfg,
            report: &report,
        },
    )?;

    Ok(SimulateArtifacts {
        report,
        trace_paths: [trace1_path, trace2_path],
        report_path,
    })
}

pub struct SweepArtifacts {
    pub points: Vec<SweepPoint>,
    pub json_path: PathBuf,
    pub csv_path: PathBuf,
}

/// Run one comparison per axis value. Points run concurrently; a failing
/// point is recorded in the aggregate instead of aborting the sweep.
pub fn run_sweep(cfg: &RunConfig, axis: Axis, values: &[f64]) -> Result<SweepArtifacts, CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    cfg.validate()?;

    let points: Vec<SweepPoint> = values
        .par_iter()
        .map(|&value| {
            let mut point_cfg = cfg.clone();
            axis.set(&mut point_cfg, value);
            match compute_report(&point_cfg) {
                Ok(report) => SweepPoint {
                    value,
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    report: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let json_path = dir.join("sweep.json");
    let csv_path = dir.join("sweep.csv");
    write_json(&json_path, &points)?;
    write_sweep_csv(&csv_path, &points)?;

    Ok(SweepArtifacts {
        points,
        json_path,
        csv_path,
    })
}
