//! Particle swarm search over design matrices.

mod params;
mod run;
mod swarm;
mod topology;

pub use params::{PsoParams, C_ATTRACT, EXPECTED_INFORMEES, OMEGA, SWARM_SIZE};
pub use run::{optimize, run, RunResult, SearchOutcome, StopReason};
pub(crate) use run::run_with_grid;
pub use swarm::{confine, init_swarm, velocity_update, Best, Objective, Particle, SearchSpace, SwarmState};
pub use topology::{gen_neighbors, InformantGraph};
