//! Random local communication topology.
//!
//! Every particle informs itself plus `m` particles drawn uniformly with
//! replacement, so on average each particle is informed by about `m + 1`
//! others, and any count from 1 to `S` is possible.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformantGraph {
    /// `informs[i]`: sorted, deduplicated particles that `i` informs.
    informs: Vec<Vec<usize>>,
    /// `informants[i]`: sorted particles that inform `i`.
    informants: Vec<Vec<usize>>,
}

impl InformantGraph {
    pub fn random<R: Rng + ?Sized>(swarm_size: usize, informees: usize, rng: &mut R) -> Self {
        let informs: Vec<Vec<usize>> = (0..swarm_size)
            .map(|i| {
                let mut links = Vec::with_capacity(informees + 1);
                links.push(i);
                links.extend((0..informees).map(|_| rng.random_range(0..swarm_size)));
                links.sort_unstable();
                links.dedup();
                links
            })
            .collect();
        let mut informants = vec![Vec::new(); swarm_size];
        for (j, targets) in informs.iter().enumerate() {
            for &i in targets {
                informants[i].push(j);
            }
        }
        Self { informs, informants }
    }

    pub fn len(&self) -> usize {
        self.informs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.informs.is_empty()
    }

    pub fn informs(&self, i: usize) -> &[usize] {
        &self.informs[i]
    }

    pub fn informants(&self, i: usize) -> &[usize] {
        &self.informants[i]
    }

    /// For every particle, the informant with the lowest score (lowest index on ties).
    pub fn best_informants(&self, scores: &[f64]) -> Vec<usize> {
        self.informants
            .iter()
            .map(|inf| {
                let mut best = inf[0];
                for &j in &inf[1..] {
                    if scores[j] < scores[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}

/// Draws a fresh informant graph.
pub fn gen_neighbors<R: Rng + ?Sized>(swarm_size: usize, informees: usize, rng: &mut R) -> InformantGraph {
    InformantGraph::random(swarm_size, informees, rng)
}
