use serde::Serialize;

use super::batch::Catalog;
use crate::error::{Error, Result};
use crate::scoring::relative_efficiency;

/// Projected evaluation count with a normal-approximation Poisson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledCount {
    pub estimate: f64,
    pub ci95: (f64, f64),
}

/// Scales an observed evaluation total over `n_observed` searches to
/// `n_target` searches: `total * r` with interval `+-1.96 sqrt(total) * r`,
/// `r = n_target / n_observed`.
pub fn scale_eval_count(total: u64, n_observed: usize, n_target: usize) -> Result<ScaledCount> {
    if n_observed == 0 || n_target == 0 {
        return Err(Error::invalid("run counts must be positive"));
    }
    let ratio = n_target as f64 / n_observed as f64;
    let estimate = total as f64 * ratio;
    let half = 1.96 * (total as f64).sqrt() * ratio;
    Ok(ScaledCount {
        estimate,
        ci95: (estimate - half, estimate + half),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub total_evals: u64,
    pub log10_evals: f64,
    pub scaled_estimate: f64,
    pub scaled_ci: (f64, f64),
    pub target_n_runs: usize,
}

pub fn cost_summary(catalog: &Catalog, target_n_runs: usize) -> Result<CostSummary> {
    let total = catalog.total_evals();
    let scaled = scale_eval_count(total, catalog.results.len(), target_n_runs)?;
    Ok(CostSummary {
        total_evals: total,
        log10_evals: (total as f64).log10(),
        scaled_estimate: scaled.estimate,
        scaled_ci: scaled.ci95,
        target_n_runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub k: usize,
    pub n: usize,
    pub p: usize,
    pub best_g: f64,
    pub best_g_eff: f64,
    pub g_effs: Vec<f64>,
    pub baseline_eff: Option<f64>,
    /// Per-run efficiency relative to the baseline, when one is given.
    pub releffs: Option<Vec<f64>>,
    pub min_releff: Option<f64>,
    pub median_releff: Option<f64>,
    pub max_releff: Option<f64>,
    pub total_evals: u64,
    pub log10_evals: f64,
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        0.5 * (sorted[m - 1] + sorted[m])
    }
}

/// Efficiencies of every run and, with a baseline, their relative efficiencies.
pub fn summarize(catalog: &Catalog, baseline_eff: Option<f64>) -> Result<Summary> {
    if catalog.results.is_empty() {
        return Err(Error::invalid("cannot summarize an empty catalog"));
    }
    let g_effs: Vec<f64> = catalog.results.iter().map(|r| r.best_g_eff).collect();
    let releffs = baseline_eff
        .map(|b| g_effs.iter().map(|&e| relative_efficiency(e, b)).collect::<Result<Vec<_>>>())
        .transpose()?;
    let (min_releff, median_releff, max_releff) = match &releffs {
        Some(r) => {
            let mut sorted = r.clone();
            sorted.sort_by(f64::total_cmp);
            (Some(sorted[0]), Some(median(&sorted)), Some(sorted[sorted.len() - 1]))
        }
        None => (None, None, None),
    };
    let best = catalog.best();
    let total = catalog.total_evals();
    Ok(Summary {
        k: catalog.scenario.k_factors,
        n: catalog.scenario.n_runs_design,
        p: catalog.scenario.model_spec()?.p(),
        best_g: best.best_g,
        best_g_eff: best.best_g_eff,
        g_effs,
        baseline_eff,
        releffs,
        min_releff,
        median_releff,
        max_releff,
        total_evals: total,
        log10_evals: (total as f64).log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DesignMatrix;
    use crate::pso::{RunResult, StopReason};
    use crate::scenario::ScenarioConfig;

    fn fake_run(seed: u64, eff: f64, evals: u64) -> RunResult {
        let p = 15.0;
        RunResult {
            best_design: DesignMatrix::from_rows(&[[0.0; 4]]).unwrap(),
            best_g: 100.0 * p / eff,
            best_g_eff: eff,
            eval_count: evals,
            iterations: 1,
            seed,
            stop_reason: StopReason::Converged,
            trace: None,
        }
    }

    fn catalog(effs: &[f64]) -> Catalog {
        let runs = effs.iter().enumerate().map(|(i, &e)| fake_run(i as u64, e, 300)).collect();
        Catalog::new(ScenarioConfig::new(4, 15).unwrap(), runs).unwrap()
    }

    #[test]
    fn scaling_by_hand() {
        let s = scale_eval_count(100, 140, 200).unwrap();
        assert!((s.estimate - 142.857).abs() < 1e-3);
        assert!((s.ci95.0 - 114.857).abs() < 1e-3);
        assert!((s.ci95.1 - 170.857).abs() < 1e-3);

        let z = scale_eval_count(0, 140, 200).unwrap();
        assert_eq!(z, ScaledCount { estimate: 0.0, ci95: (0.0, 0.0) });

        let id = scale_eval_count(400, 7, 7).unwrap();
        assert_eq!(id.estimate, 400.0);
        assert!((id.ci95.1 - id.estimate - 1.96 * 20.0).abs() < 1e-9);

        assert!(scale_eval_count(1, 0, 5).is_err());
        assert!(scale_eval_count(1, 5, 0).is_err());
    }

    #[test]
    fn identical_runs_have_flat_distribution() {
        let s = summarize(&catalog(&[60.0, 60.0, 60.0]), Some(50.0)).unwrap();
        assert_eq!(s.min_releff, s.median_releff);
        assert_eq!(s.median_releff, s.max_releff);
    }

    #[test]
    fn self_relative_tops_out_at_100() {
        let c = catalog(&[55.0, 71.09, 64.0, 70.0]);
        let best = c.best().best_g_eff;
        let s = summarize(&c, Some(best)).unwrap();
        assert_eq!(s.max_releff, Some(100.0));
        assert_eq!(s.median_releff, Some(0.5 * (100.0 * 64.0 / 71.09 + 100.0 * 70.0 / 71.09)));
    }

    #[test]
    fn published_four_factor_gain() {
        let s = summarize(&catalog(&[71.09]), Some(48.89)).unwrap();
        assert!((s.max_releff.unwrap() - 145.41).abs() < 0.01);
        assert!((s.log10_evals - 300f64.log10()).abs() < 1e-12);
        let none = summarize(&catalog(&[71.09]), None).unwrap();
        assert!(none.releffs.is_none() && none.min_releff.is_none());
    }

    #[test]
    fn cost_summary_interval_contains_estimate() {
        let c = catalog(&[50.0, 60.0]);
        let cost = cost_summary(&c, 200).unwrap();
        assert_eq!(cost.total_evals, 600);
        assert!(cost.scaled_ci.0 <= cost.scaled_estimate && cost.scaled_estimate <= cost.scaled_ci.1);
    }
}
