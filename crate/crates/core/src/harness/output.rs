//! CSV persistence. Every file is written to a temporary sibling and renamed
//! into place, so readers never observe a half-written trace.

use std::path::Path;

use tempfile::NamedTempFile;

use super::ExperimentConfig;
use crate::error::HarnessError;
use crate::optimizer::{OptimizationResult, RunStatus};
use crate::stats::quantile;

pub const TRACE_FIXED_COLUMNS: [&str; 11] =
    ["seed", "algo", "objective", "dim", "call_index", "f_value", "best_so_far", "beta", "R", "mode", "wall_ms"];
pub const SUMMARY_HEADER: [&str; 6] = ["call_index", "n_runs", "median", "q25", "q75", "status"];

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Write { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Write { path: path.to_path_buf(), source: e.into() }
}

fn atomic_csv(path: &Path, fill: impl FnOnce(&mut csv::Writer<&mut NamedTempFile>) -> csv::Result<()>) -> Result<(), HarnessError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir).map_err(write_err(path))?;
    {
        let mut w = csv::Writer::from_writer(&mut tmp);
        fill(&mut w).map_err(csv_err(path))?;
        w.flush().map_err(write_err(path))?;
    }
    tmp.as_file_mut().sync_all().map_err(write_err(path))?;
    tmp.persist(path).map_err(|e| write_err(path)(e.error))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub(super) fn write_trace(path: &Path, config: &ExperimentConfig, seed: u64, result: &OptimizationResult) -> Result<(), HarnessError> {
    atomic_csv(path, |w| {
        let mut header: Vec<String> = TRACE_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend((0..config.dim).map(|i| format!("theta_{i}")));
        w.write_record(&header)?;
        let (seed, algo, dim) = (seed.to_string(), config.algo.as_str(), config.dim.to_string());
        for rec in &result.trace {
            let wall = if config.wall_clock { format!("{:.3}", rec.wall_ms) } else { String::new() };
            let mut row = vec![
                seed.clone(),
                algo.to_string(),
                config.objective.clone(),
                dim.clone(),
                rec.call_index.to_string(),
                rec.f_value.to_string(),
                rec.best_so_far.to_string(),
                opt(rec.beta),
                opt(rec.radius),
                rec.mode.as_str().to_string(),
                wall,
            ];
            row.extend(rec.theta.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub call_index: usize,
    pub n_runs: usize,
    pub median: Option<f64>,
    pub q25: Option<f64>,
    pub q75: Option<f64>,
}

/// Per-call median and quartiles of best-so-far across runs; runs that
/// stopped early simply drop out of later rows.
pub fn summary_rows(best_so_far: &[Vec<f64>], budget: usize) -> Vec<SummaryRow> {
    (0..budget)
        .map(|k| {
            let at_k: Vec<f64> = best_so_far.iter().filter_map(|run| run.get(k).copied()).collect();
            SummaryRow {
                call_index: k,
                n_runs: at_k.len(),
                median: quantile(&at_k, 0.5),
                q25: quantile(&at_k, 0.25),
                q75: quantile(&at_k, 0.75),
            }
        })
        .collect()
}

pub(super) fn write_summary(path: &Path, config: &ExperimentConfig, runs: &[(u64, OptimizationResult)]) -> Result<(), HarnessError> {
    let curves: Vec<Vec<f64>> = runs.iter().map(|(_, r)| r.trace.iter().map(|t| t.best_so_far).collect()).collect();
    let aborted: Vec<String> = runs
        .iter()
        .filter(|(_, r)| matches!(r.status, RunStatus::Aborted(_)))
        .map(|(s, _)| s.to_string())
        .collect();
    let status = if aborted.is_empty() { "complete".to_string() } else { format!("aborted:{}", aborted.join("|")) };
    atomic_csv(path, |w| {
        w.write_record(SUMMARY_HEADER)?;
        for row in summary_rows(&curves, config.optimizer.budget) {
            w.write_record([
                row.call_index.to_string(),
                row.n_runs.to_string(),
                opt(row.median),
                opt(row.q25),
                opt(row.q75),
                status.clone(),
            ])?;
        }
        Ok(())
    })
}

/// The `best_so_far` column of a trace file.
pub fn read_best_so_far(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let read_err = |source: std::io::Error| HarnessError::Read { path: path.to_path_buf(), source };
    let invalid = |msg: String| read_err(std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
    let mut r = csv::Reader::from_path(path).map_err(|e| read_err(e.into()))?;
    let col = r
        .headers()
        .map_err(|e| read_err(e.into()))?
        .iter()
        .position(|h| h == "best_so_far")
        .ok_or_else(|| invalid("no best_so_far column".into()))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| read_err(e.into()))?;
        out.push(rec[col].parse().map_err(|e| invalid(format!("{e}")))?);
    }
    Ok(out)
}

