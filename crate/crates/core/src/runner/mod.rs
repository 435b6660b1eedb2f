//! Batch orchestration, summaries and cost accounting.

mod batch;
mod files;
mod summary;

pub use batch::{run_batch, Catalog};
pub use files::{write_catalog_json, write_runs_csv, write_summary_csv, write_trace_csv, CatalogFile, RunRecord};
pub use summary::{cost_summary, scale_eval_count, summarize, CostSummary, ScaledCount, Summary};
