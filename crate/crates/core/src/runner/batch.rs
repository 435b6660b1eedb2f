use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pso::{run_with_grid, RunResult};
use crate::scenario::ScenarioConfig;

/// All searches of one scenario, in run-index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    pub scenario: ScenarioConfig,
    pub results: Vec<RunResult>,
    /// Run with the lowest G-score; lowest index on ties.
    pub best_index: usize,
}

impl Catalog {
    pub fn new(scenario: ScenarioConfig, results: Vec<RunResult>) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::invalid("a catalog needs at least one run"));
        }
        let mut best_index = 0;
        for (i, r) in results.iter().enumerate() {
            if r.best_g < results[best_index].best_g {
                best_index = i;
            }
        }
        Ok(Self {
            scenario,
            results,
            best_index,
        })
    }

    pub fn best(&self) -> &RunResult {
        &self.results[self.best_index]
    }

    pub fn total_evals(&self) -> u64 {
        self.results.iter().map(|r| r.eval_count).sum()
    }
}

/// Runs `n_searches` independent searches with seeds `base_seed + i` on up to
/// `parallelism` threads. The catalog does not depend on the thread count.
pub fn run_batch(scenario: &ScenarioConfig) -> Result<Catalog> {
    scenario.validate()?;
    let grid = scenario.scoring_grid()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(scenario.parallelism)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        (0..scenario.n_searches)
            .into_par_iter()
            .map(|i| {
                let seed = scenario.base_seed.wrapping_add(i as u64);
                run_with_grid(scenario, &grid, &scenario.pso, seed)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Catalog::new(scenario.clone(), results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pso::PsoParams;

    fn small_scenario() -> ScenarioConfig {
        let mut s = ScenarioConfig::new(1, 3).unwrap();
        s.n_searches = 4;
        s.base_seed = 100;
        s.pso = PsoParams { swarm_size: 20, ..Default::default() };
        s
    }

    #[test]
    fn seeds_follow_run_index() {
        let mut s = small_scenario();
        s.parallelism = 2;
        let cat = run_batch(&s).unwrap();
        let seeds: Vec<u64> = cat.results.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, [100, 101, 102, 103]);
        assert_eq!(cat.total_evals(), cat.results.iter().map(|r| r.eval_count).sum::<u64>());
        let min = cat.results.iter().map(|r| r.best_g).fold(f64::INFINITY, f64::min);
        assert_eq!(cat.best().best_g, min);
    }

    #[test]
    fn empty_catalog_rejected() {
        assert!(Catalog::new(small_scenario(), Vec::new()).is_err());
    }
}
