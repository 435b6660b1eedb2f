//! Search scenarios: the design problem plus how many searches to run and how.

use serde::{Deserialize, Serialize};

use crate::design::Bounds;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::pso::PsoParams;
use crate::scoring::{ScoringGrid, DEFAULT_GRID_LEVELS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub k_factors: usize,
    pub n_runs_design: usize,
    pub bounds: Bounds,
    pub grid_levels: usize,
    pub pso: PsoParams,
    /// Independent searches in a batch.
    pub n_searches: usize,
    /// Search `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    /// Worker threads for a batch; does not affect results.
    pub parallelism: usize,
}

impl ScenarioConfig {
    /// Defaults: `[-1, 1]^K`, 5-level grid, default swarm, 140 searches, seed 0.
    pub fn new(k_factors: usize, n_runs_design: usize) -> Result<Self> {
        let cfg = Self {
            k_factors,
            n_runs_design,
            bounds: Bounds::unit(k_factors),
            grid_levels: DEFAULT_GRID_LEVELS,
            pso: PsoParams::default(),
            n_searches: 140,
            base_seed: 0,
            parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let spec = ModelSpec::quadratic(self.k_factors)?;
        if self.n_runs_design == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if self.bounds.k() != self.k_factors {
            return Err(Error::DimensionMismatch {
                expected: self.k_factors,
                found: self.bounds.k(),
            });
        }
        if self.grid_levels < 2 {
            return Err(Error::invalid("grid needs at least 2 levels per factor"));
        }
        if self.n_searches == 0 {
            return Err(Error::invalid("need at least one search"));
        }
        if self.parallelism == 0 {
            return Err(Error::invalid("parallelism must be at least 1"));
        }
        self.pso.validate()?;
        self.pso.resolve_vmax(&self.bounds)?;
        if self.n_runs_design < spec.p() {
            log::warn!(
                "N = {} is below p = {}: every design is singular and scores +inf",
                self.n_runs_design,
                spec.p()
            );
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        ModelSpec::quadratic(self.k_factors)
    }

    pub fn scoring_grid(&self) -> Result<ScoringGrid> {
        ScoringGrid::equispaced(&self.model_spec()?, self.grid_levels, &self.bounds)
    }
}

/// Previously reported figures for a scenario, kept for side-by-side reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedReference {
    /// Best swarm design's efficiency relative to the GA design, in percent (K <= 3).
    pub pso_releff_vs_ga: Option<f64>,
    /// log10 of total objective evaluations over 140 searches (K <= 3).
    pub pso_log10_evals: Option<f64>,
    /// G-efficiency of the best coordinate-exchange design (K >= 4).
    pub cexch_eff: Option<f64>,
    pub cexch_source: Option<&'static str>,
    /// G-efficiency of the best swarm design (K >= 4).
    pub pso_eff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BuiltinScenario {
    pub k: usize,
    pub n: usize,
    pub n_searches: usize,
    pub published: PublishedReference,
}

impl BuiltinScenario {
    pub fn config(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::new(self.k, self.n)?;
        cfg.n_searches = self.n_searches;
        Ok(cfg)
    }
}

const fn small(k: usize, n: usize, releff: f64, log10: f64) -> BuiltinScenario {
    BuiltinScenario {
        k,
        n,
        n_searches: 140,
        published: PublishedReference {
            pso_releff_vs_ga: Some(releff),
            pso_log10_evals: Some(log10),
            cexch_eff: None,
            cexch_source: None,
            pso_eff: None,
        },
    }
}

const fn large(k: usize, n: usize, cexch: f64, source: &'static str, pso: f64) -> BuiltinScenario {
    BuiltinScenario {
        k,
        n,
        n_searches: 210,
        published: PublishedReference {
            pso_releff_vs_ga: None,
            pso_log10_evals: None,
            cexch_eff: Some(cexch),
            cexch_source: Some(source),
            pso_eff: Some(pso),
        },
    }
}

const RODRIGUEZ: &str = "Rodriguez et al. (2010)";
const HERNANDEZ: &str = "Hernandez and Nachtsheim (2018)";

/// The 29 published scenarios: K=1..3 (seven N each) and K=4, 5 (four N each).
pub const BUILTIN_SCENARIOS: [BuiltinScenario; 29] = [
    small(1, 3, 100.0, 6.000),
    small(1, 4, 100.0, 6.535),
    small(1, 5, 100.0, 6.681),
    small(1, 6, 100.0, 6.226),
    small(1, 7, 100.0, 6.685),
    small(1, 8, 100.0, 6.761),
    small(1, 9, 100.0, 6.405),
    small(2, 6, 100.3, 7.088),
    small(2, 7, 100.1, 7.086),
    small(2, 8, 100.0, 7.042),
    small(2, 9, 100.3, 7.119),
    small(2, 10, 101.7, 7.163),
    small(2, 11, 101.0, 7.221),
    small(2, 12, 103.9, 7.196),
    small(3, 10, 101.6, 7.437),
    small(3, 11, 104.2, 7.511),
    small(3, 12, 103.8, 7.544),
    small(3, 13, 103.2, 7.538),
    small(3, 14, 100.5, 7.543),
    small(3, 15, 102.5, 7.515),
    small(3, 16, 108.1, 7.556),
    large(4, 15, 48.89, RODRIGUEZ, 71.09),
    large(4, 17, 70.14, HERNANDEZ, 73.90),
    large(4, 20, 65.11, RODRIGUEZ, 80.20),
    large(4, 24, 81.05, RODRIGUEZ, 85.95),
    large(5, 21, 38.74, RODRIGUEZ, 68.67),
    large(5, 23, 73.02, HERNANDEZ, 73.19),
    large(5, 26, 72.47, RODRIGUEZ, 75.31),
    large(5, 30, 75.80, RODRIGUEZ, 76.16),
];

pub fn builtin_scenario(k: usize, n: usize) -> Option<&'static BuiltinScenario> {
    BUILTIN_SCENARIOS.iter().find(|s| s.k == k && s.n == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::relative_efficiency;

    #[test]
    fn table_covers_published_cases() {
        assert_eq!(BUILTIN_SCENARIOS.len(), 29);
        let runs: usize = BUILTIN_SCENARIOS.iter().map(|s| s.n_searches).sum();
        assert_eq!(runs, 4620);
        for k in 1..=3 {
            let ns: Vec<usize> = BUILTIN_SCENARIOS.iter().filter(|s| s.k == k).map(|s| s.n).collect();
            let first = [3, 6, 10][k - 1];
            assert_eq!(ns, (first..first + 7).collect::<Vec<_>>());
        }
        assert!(builtin_scenario(4, 17).is_some());
        assert!(builtin_scenario(4, 16).is_none());
    }

    #[test]
    fn published_large_factor_releffs() {
        let expect = [145.41, 105.36, 123.18, 106.05, 177.26, 100.24, 103.92, 100.47];
        for (s, want) in BUILTIN_SCENARIOS[21..].iter().zip(expect) {
            let got = relative_efficiency(s.published.pso_eff.unwrap(), s.published.cexch_eff.unwrap()).unwrap();
            assert!((got - want).abs() < 0.01, "K={} N={}: {got} vs {want}", s.k, s.n);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(ScenarioConfig::new(0, 3).is_err());
        assert!(ScenarioConfig::new(2, 0).is_err());
        let mut c = ScenarioConfig::new(2, 6).unwrap();
        c.bounds = Bounds::unit(3);
        assert!(c.validate().is_err());
        // Undersized designs are allowed.
        assert!(ScenarioConfig::new(2, 4).is_ok());
    }
}
