//! Exact G-optimal designs for the full quadratic response-surface model on a
//! hyper-rectangle, found with a particle swarm whose particles are whole
//! design matrices.
//!
//! * [`model`] and [`scoring`]: model expansion, information matrix, scaled
//!   prediction variance, grid G-scores and efficiencies.
//! * [`pso`]: the swarm search.
//! * [`runner`] and [`scenario`]: seeded batches, catalogs and cost accounting.
//! * [`verify`]: fine-grid rescoring and an independent brute-force scorer.

pub mod cli;
pub mod design;
pub mod design_io;
pub mod error;
mod linalg;
pub mod model;
pub mod pso;
pub mod runner;
pub mod scenario;
pub mod scoring;
pub mod verify;

pub use design::{Bounds, DesignMatrix, DesignPoint};
pub use error::{Error, Result};
pub use model::{build_model_matrix, model_expand, p_count, ModelMatrix, ModelSpec, Term};
pub use pso::{run, PsoParams, RunResult, StopReason};
pub use runner::{run_batch, scale_eval_count, summarize, Catalog};
pub use scenario::{ScenarioConfig, BUILTIN_SCENARIOS};
pub use scoring::{g_efficiency, g_score, make_grid, relative_efficiency, spv, GScore, InformationMatrix, ScoringGrid};
