//! On-disk catalog formats: one JSON catalog per batch plus tidy CSV tables.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::batch::Catalog;
use super::summary::Summary;
use crate::error::{Error, Result};
use crate::pso::StopReason;
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    /// `null` in JSON when the run never found a nonsingular design.
    pub best_g: f64,
    pub best_g_eff: f64,
    pub eval_count: u64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogFile {
    pub scenario: ScenarioConfig,
    pub results: Vec<RunRecord>,
    pub best_index: usize,
}

impl From<&Catalog> for CatalogFile {
    fn from(c: &Catalog) -> Self {
        Self {
            scenario: c.scenario.clone(),
            results: c
                .results
                .iter()
                .map(|r| RunRecord {
                    seed: r.seed,
                    best_g: r.best_g,
                    best_g_eff: r.best_g_eff,
                    eval_count: r.eval_count,
                    iterations: r.iterations,
                    stop_reason: r.stop_reason,
                })
                .collect(),
            best_index: c.best_index,
        }
    }
}

pub fn write_catalog_json(path: &Path, catalog: &Catalog) -> Result<()> {
    let text = serde_json::to_string_pretty(&CatalogFile::from(catalog))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns `K,N,best_G,best_Geff,min_releff,median_releff,max_releff,log10_evals`.
pub fn write_summary_csv(path: &Path, summaries: &[Summary]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "K", "N", "best_G", "best_Geff", "min_releff", "median_releff", "max_releff", "log10_evals",
    ])
    .map_err(|e| csv_err(path, e))?;
    for s in summaries {
        w.write_record([
            s.k.to_string(),
            s.n.to_string(),
            s.best_g.to_string(),
            s.best_g_eff.to_string(),
            opt(s.min_releff),
            opt(s.median_releff),
            opt(s.max_releff),
            s.log10_evals.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per run, for plotting efficiency distributions.
pub fn write_runs_csv(path: &Path, catalog: &Catalog, summary: &Summary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "run", "seed", "best_G", "best_Geff", "releff", "eval_count", "iterations", "stop_reason",
    ])
    .map_err(|e| csv_err(path, e))?;
    for (i, r) in catalog.results.iter().enumerate() {
        let releff = summary.releffs.as_ref().map(|v| v[i]);
        w.write_record([
            i.to_string(),
            r.seed.to_string(),
            r.best_g.to_string(),
            r.best_g_eff.to_string(),
            opt(releff),
            r.eval_count.to_string(),
            r.iterations.to_string(),
            r.stop_reason.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Convergence traces as `run,iteration,best_G`; runs without a trace are skipped.
pub fn write_trace_csv(path: &Path, catalog: &Catalog) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["run", "iteration", "best_G"])
        .map_err(|e| csv_err(path, e))?;
    for (i, r) in catalog.results.iter().enumerate() {
        for (t, g) in r.trace.iter().flatten() {
            w.write_record([i.to_string(), t.to_string(), g.to_string()])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
