use serde::{Deserialize, Serialize};

use crate::design::Bounds;
use crate::error::{Error, Result};

/// Inertia weight.
pub const OMEGA: f64 = 0.72984;
/// Cognitive and social weight, `2.05 * OMEGA` rounded as published.
pub const C_ATTRACT: f64 = 1.496172;
pub const SWARM_SIZE: usize = 150;
pub const EXPECTED_INFORMEES: usize = 3;

/// Swarm hyperparameters and stopping limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    pub swarm_size: usize,
    /// Per-factor velocity limit; `None` means half of each factor's range.
    pub vmax: Option<Vec<f64>>,
    pub expected_informees: usize,
    /// A run stops once the best score has improved by a positive amount
    /// smaller than this over the last `improvement_window` iterations.
    pub improvement_epsilon: f64,
    /// Iterations over which improvement is measured; 1 checks every
    /// iteration on its own.
    pub improvement_window: usize,
    pub max_iterations: usize,
    /// Consecutive iterations without any improvement before giving up.
    pub stagnation_limit: usize,
    /// Record `(iteration, best score)` after every iteration.
    pub record_trace: bool,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            omega: OMEGA,
            c1: C_ATTRACT,
            c2: C_ATTRACT,
            swarm_size: SWARM_SIZE,
            vmax: None,
            expected_informees: EXPECTED_INFORMEES,
            improvement_epsilon: f64::EPSILON.sqrt(),
            improvement_window: 500,
            max_iterations: 10_000,
            stagnation_limit: 500,
            record_trace: false,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 1.0) {
            return Err(Error::invalid(format!("omega must lie in (0, 1), got {}", self.omega)));
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {c}")));
            }
        }
        if self.swarm_size == 0 {
            return Err(Error::invalid("swarm size must be positive"));
        }
        if self.expected_informees == 0 {
            return Err(Error::invalid("expected informees must be positive"));
        }
        if self.improvement_epsilon.is_nan() || self.improvement_epsilon < 0.0 {
            return Err(Error::invalid("improvement epsilon must be >= 0"));
        }
        if self.max_iterations == 0 || self.stagnation_limit == 0 || self.improvement_window == 0 {
            return Err(Error::invalid("iteration limits must be positive"));
        }
        if let Some(v) = &self.vmax {
            if v.iter().any(|x| x.is_nan() || *x <= 0.0) {
                return Err(Error::invalid("vmax must be > 0 for every factor"));
            }
        }
        Ok(())
    }

    /// Velocity limit per factor for the given search box.
    pub fn resolve_vmax(&self, bounds: &Bounds) -> Result<Vec<f64>> {
        match &self.vmax {
            Some(v) if v.len() != bounds.k() => Err(Error::DimensionMismatch {
                expected: bounds.k(),
                found: v.len(),
            }),
            Some(v) => Ok(v.clone()),
            None => Ok((0..bounds.k()).map(|k| 0.5 * bounds.width(k)).collect()),
        }
    }
}
