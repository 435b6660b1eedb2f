use serde::{Deserialize, Serialize};

use super::params::PsoParams;
use super::swarm::{improvement, Objective, SearchSpace, SwarmState};
use crate::design::DesignMatrix;
use crate::error::Result;
use crate::scenario::ScenarioConfig;
use crate::scoring::g_efficiency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// An iteration improved the best score by less than the epsilon (but not zero).
    Converged,
    /// Too many consecutive iterations without any improvement.
    Stagnated,
    MaxIterations,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::Stagnated => "stagnated",
            StopReason::MaxIterations => "max_iterations",
        })
    }
}

/// Result of one swarm search over an arbitrary objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best_design: DesignMatrix,
    pub best_score: f64,
    pub eval_count: u64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Runs the swarm until the stopping rule fires.
pub fn optimize<O: Objective + ?Sized>(
    space: &SearchSpace,
    params: &PsoParams,
    objective: &O,
    seed: u64,
) -> Result<SearchOutcome> {
    let mut state = SwarmState::init(space, params, objective, seed)?;
    let mut trace = params.record_trace.then(|| vec![(0, state.gbest.score)]);
    let mut stagnant = 0usize;
    // Best score at the end of each of the last `window` iterations (oldest first).
    let window = params.improvement_window;
    let mut history = std::collections::VecDeque::with_capacity(window + 1);
    history.push_back(state.gbest.score);
    let stop_reason = loop {
        let delta = state.step(objective, params)?;
        if let Some(t) = trace.as_mut() {
            t.push((state.iteration, state.gbest.score));
        }
        history.push_back(state.gbest.score);
        if history.len() > window + 1 {
            history.pop_front();
        }
        if history.len() == window + 1 {
            let gain = improvement(history[0], state.gbest.score);
            if gain > 0.0 && gain < params.improvement_epsilon {
                break StopReason::Converged;
            }
        }
        if delta == 0.0 {
            stagnant += 1;
            if stagnant >= params.stagnation_limit {
                break StopReason::Stagnated;
            }
        } else {
            stagnant = 0;
        }
        if state.iteration >= params.max_iterations {
            break StopReason::MaxIterations;
        }
    };
    log::debug!(
        "seed {seed}: {} after {} iterations, best {}",
        stop_reason,
        state.iteration,
        state.gbest.score
    );
    Ok(SearchOutcome {
        best_design: state.gbest.position,
        best_score: state.gbest.score,
        eval_count: state.eval_count,
        iterations: state.iteration,
        stop_reason,
        trace,
    })
}

/// One G-optimal design search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_design: DesignMatrix,
    /// Grid G-score of `best_design`; `+inf` if no particle was ever nonsingular.
    pub best_g: f64,
    pub best_g_eff: f64,
    pub eval_count: u64,
    pub iterations: usize,
    pub seed: u64,
    pub stop_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Searches for a G-optimal design for `scenario` using the grid G-score.
pub fn run(scenario: &ScenarioConfig, params: &PsoParams, seed: u64) -> Result<RunResult> {
    let grid = scenario.scoring_grid()?;
    run_with_grid(scenario, &grid, params, seed)
}

pub(crate) fn run_with_grid(
    scenario: &ScenarioConfig,
    grid: &crate::scoring::ScoringGrid,
    params: &PsoParams,
    seed: u64,
) -> Result<RunResult> {
    let space = SearchSpace::new(scenario.n_runs_design, scenario.bounds.clone())?;
    let out = optimize(&space, params, grid, seed)?;
    Ok(RunResult {
        best_g_eff: g_efficiency(out.best_score, grid.spec().p())?,
        best_g: out.best_score,
        best_design: out.best_design,
        eval_count: out.eval_count,
        iterations: out.iterations,
        seed,
        stop_reason: out.stop_reason,
        trace: out.trace,
    })
}
