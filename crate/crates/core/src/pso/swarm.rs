//! Matrix-particle swarm: each particle is a whole `N x K` design with an
//! `N x K` velocity.
//!
//! Random numbers are drawn from one ChaCha8 stream in a fixed order:
//! for each particle its position rows then its velocity rows, then the
//! initial informant graph; per iteration the regenerated graph (if any),
//! then for each particle in index order the cognitive matrix `U1` followed
//! by the social matrix `U2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::params::PsoParams;
use super::topology::InformantGraph;
use crate::design::{Bounds, DesignMatrix};
use crate::error::{Error, Result};

/// Anything that scores a candidate design; lower is better.
pub trait Objective {
    fn evaluate(&self, design: &DesignMatrix) -> f64;
}

impl<F> Objective for F
where
    F: Fn(&DesignMatrix) -> f64,
{
    fn evaluate(&self, design: &DesignMatrix) -> f64 {
        self(design)
    }
}

impl Objective for crate::scoring::ScoringGrid {
    fn evaluate(&self, design: &DesignMatrix) -> f64 {
        self.objective(design)
    }
}

/// `n_rows` design points inside `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub n_rows: usize,
    pub bounds: Bounds,
}

impl SearchSpace {
    pub fn new(n_rows: usize, bounds: Bounds) -> Result<Self> {
        if n_rows == 0 {
            return Err(Error::invalid("a design needs at least one run"));
        }
        Ok(Self { n_rows, bounds })
    }

    pub fn k(&self) -> usize {
        self.bounds.k()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: DesignMatrix,
    /// Row-major `N x K`.
    pub velocity: Vec<f64>,
    pub score: f64,
    pub pbest_position: DesignMatrix,
    pub pbest_score: f64,
}

/// A remembered position and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Best {
    pub position: DesignMatrix,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmState {
    pub space: SearchSpace,
    pub vmax: Vec<f64>,
    pub particles: Vec<Particle>,
    pub graph: InformantGraph,
    /// Neighbourhood bests, refreshed between particle sweeps only.
    pub lbest: Vec<Best>,
    pub gbest: Best,
    pub iteration: usize,
    pub eval_count: u64,
    /// Drop in the best score during the latest iteration; `None` before the first.
    pub last_improvement: Option<f64>,
    rng: ChaCha8Rng,
}

/// New velocity `w V + c1 U1 o (P - X) + c2 U2 o (L - X)`, clamped to `+-vmax`
/// per factor. `U1` and `U2` are independent uniform matrices, drawn in that order.
pub fn velocity_update<R: Rng + ?Sized>(
    particle: &Particle,
    lbest: &DesignMatrix,
    params: &PsoParams,
    vmax: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    let x = &particle.position;
    let (n, k) = (x.n(), x.k());
    if particle.velocity.len() != n * k
        || particle.pbest_position.k() != k
        || particle.pbest_position.n() != n
        || lbest.n() != n
        || lbest.k() != k
        || vmax.len() != k
    {
        return Err(Error::invalid("particle, best positions and vmax must share the N x K shape"));
    }
    let u1: Vec<f64> = (0..n * k).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity(n * k);
    for idx in 0..n * k {
        let u2: f64 = rng.random();
        let xi = x.as_slice()[idx];
        let v = params.omega * particle.velocity[idx]
            + params.c1 * u1[idx] * (particle.pbest_position.as_slice()[idx] - xi)
            + params.c2 * u2 * (lbest.as_slice()[idx] - xi);
        let lim = vmax[idx % k];
        out.push(v.clamp(-lim, lim));
    }
    Ok(out)
}

/// Reflecting walls: an out-of-range coordinate is put on the violated
/// bound and its velocity component becomes `-v/2`.
pub fn confine(position: &mut [f64], velocity: &mut [f64], bounds: &Bounds) {
    let k = bounds.k();
    for (idx, (x, v)) in position.iter_mut().zip(velocity.iter_mut()).enumerate() {
        let (lo, hi) = (bounds.lower()[idx % k], bounds.upper()[idx % k]);
        if *x < lo {
            *x = lo;
            *v *= -0.5;
        } else if *x > hi {
            *x = hi;
            *v *= -0.5;
        }
    }
}

/// `before - after`, defined as zero when both are the same (including `+inf`).
pub(crate) fn improvement(before: f64, after: f64) -> f64 {
    if before == after {
        0.0
    } else {
        before - after
    }
}

impl SwarmState {
    /// Draws `S` random designs and velocities and scores each once.
    pub fn init<O: Objective + ?Sized>(
        space: &SearchSpace,
        params: &PsoParams,
        objective: &O,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        let vmax = params.resolve_vmax(&space.bounds)?;
        let (n, k) = (space.n_rows, space.k());
        let (lo, hi) = (space.bounds.lower(), space.bounds.upper());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut particles = Vec::with_capacity(params.swarm_size);
        for _ in 0..params.swarm_size {
            let mut position = DesignMatrix::zeros(n, k);
            for (idx, x) in position.as_mut_slice().iter_mut().enumerate() {
                let c = idx % k;
                *x = lo[c] + (hi[c] - lo[c]) * rng.random::<f64>();
            }
            let velocity: Vec<f64> = position
                .as_slice()
                .iter()
                .enumerate()
                .map(|(idx, &x)| {
                    let c = idx % k;
                    let (a, b) = (0.5 * (lo[c] - x), 0.5 * (hi[c] - x));
                    (a + (b - a) * rng.random::<f64>()).clamp(-vmax[c], vmax[c])
                })
                .collect();
            let score = objective.evaluate(&position);
            particles.push(Particle {
                pbest_position: position.clone(),
                pbest_score: score,
                position,
                velocity,
                score,
            });
        }
        let graph = InformantGraph::random(params.swarm_size, params.expected_informees, &mut rng);

        let mut gbest_idx = 0;
        for (i, p) in particles.iter().enumerate() {
            if p.pbest_score < particles[gbest_idx].pbest_score {
                gbest_idx = i;
            }
        }
        let gbest = Best {
            position: particles[gbest_idx].pbest_position.clone(),
            score: particles[gbest_idx].pbest_score,
        };
        let mut state = Self {
            space: space.clone(),
            vmax,
            eval_count: particles.len() as u64,
            particles,
            graph,
            lbest: Vec::new(),
            gbest,
            iteration: 0,
            last_improvement: None,
            rng,
        };
        state.refresh_lbest();
        Ok(state)
    }

    pub fn swarm_size(&self) -> usize {
        self.particles.len()
    }

    fn refresh_lbest(&mut self) {
        let scores: Vec<f64> = self.particles.iter().map(|p| p.pbest_score).collect();
        self.lbest = self
            .graph
            .best_informants(&scores)
            .into_iter()
            .map(|j| Best {
                position: self.particles[j].pbest_position.clone(),
                score: self.particles[j].pbest_score,
            })
            .collect();
    }

    /// One full iteration; returns the drop in the global best score.
    pub fn step<O: Objective + ?Sized>(&mut self, objective: &O, params: &PsoParams) -> Result<f64> {
        if self.last_improvement == Some(0.0) {
            self.graph =
                InformantGraph::random(self.swarm_size(), params.expected_informees, &mut self.rng);
            self.refresh_lbest();
        }
        let before = self.gbest.score;
        for i in 0..self.particles.len() {
            let v = velocity_update(
                &self.particles[i],
                &self.lbest[i].position,
                params,
                &self.vmax,
                &mut self.rng,
            )?;
            let particle = &mut self.particles[i];
            particle.velocity = v;
            for (x, v) in particle.position.as_mut_slice().iter_mut().zip(&particle.velocity) {
                *x += v;
            }
            confine(
                particle.position.as_mut_slice(),
                &mut particle.velocity,
                &self.space.bounds,
            );
            particle.score = objective.evaluate(&particle.position);
            self.eval_count += 1;
            if particle.score < particle.pbest_score {
                particle.pbest_position.clone_from(&particle.position);
                particle.pbest_score = particle.score;
                if particle.pbest_score < self.gbest.score {
                    self.gbest.position.clone_from(&particle.pbest_position);
                    self.gbest.score = particle.pbest_score;
                }
            }
        }
        self.refresh_lbest();
        self.iteration += 1;
        let delta = improvement(before, self.gbest.score);
        self.last_improvement = Some(delta);
        Ok(delta)
    }

    /// Largest pairwise Frobenius distance between particle positions.
    pub fn radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for (a, pa) in self.particles.iter().enumerate() {
            for pb in &self.particles[a + 1..] {
                let d2: f64 = pa
                    .position
                    .as_slice()
                    .iter()
                    .zip(pb.position.as_slice())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum();
                r = r.max(d2.sqrt());
            }
        }
        r
    }
}

/// Free-function form of [`SwarmState::init`].
pub fn init_swarm<O: Objective + ?Sized>(
    space: &SearchSpace,
    params: &PsoParams,
    objective: &O,
    seed: u64,
) -> Result<SwarmState> {
    SwarmState::init(space, params, objective, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn particle(x: Vec<f64>, v: Vec<f64>, pbest: Vec<f64>, k: usize) -> Particle {
        let n = x.len() / k;
        Particle {
            position: DesignMatrix::from_row_major(n, k, x).unwrap(),
            velocity: v,
            score: 0.0,
            pbest_position: DesignMatrix::from_row_major(n, k, pbest).unwrap(),
            pbest_score: 0.0,
        }
    }

    #[test]
    fn confine_reflects_violations_only() {
        let b = Bounds::unit(2);
        let mut x = vec![1.3, 0.2, -1.5, -1.0];
        let mut v = vec![0.6, 0.1, -0.4, -0.3];
        confine(&mut x, &mut v, &b);
        assert_eq!(x, [1.0, 0.2, -1.0, -1.0]);
        assert_eq!(v, [-0.3, 0.1, 0.2, -0.3]);
    }

    #[test]
    fn velocity_vanishes_at_rest() {
        let p = particle(vec![0.2, -0.4], vec![0.0, 0.0], vec![0.2, -0.4], 2);
        let lbest = p.position.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = velocity_update(&p, &lbest, &PsoParams::default(), &[1.0, 1.0], &mut rng).unwrap();
        assert_eq!(v, [0.0, 0.0]);
    }

    #[test]
    fn pure_inertia_scales_velocity() {
        let params = PsoParams { omega: 0.5, c1: 0.0, c2: 0.0, ..Default::default() };
        let p = particle(vec![0.0, 0.0], vec![0.8, -0.6], vec![1.0, 1.0], 2);
        let lbest = DesignMatrix::from_rows(&[[-1.0, -1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = velocity_update(&p, &lbest, &params, &[1.0, 1.0], &mut rng).unwrap();
        assert_eq!(v, [0.4, -0.3]);
    }

    #[test]
    fn velocity_is_clamped() {
        let p = particle(vec![-1.0, 1.0], vec![5.0, -5.0], vec![1.0, -1.0], 2);
        let lbest = DesignMatrix::from_rows(&[[1.0, -1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = velocity_update(&p, &lbest, &PsoParams::default(), &[0.25, 0.5], &mut rng).unwrap();
        assert_eq!(v, [0.25, -0.5]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let p = particle(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0], 2);
        let lbest = DesignMatrix::from_rows(&[[0.0], [0.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(velocity_update(&p, &lbest, &PsoParams::default(), &[1.0, 1.0], &mut rng).is_err());
    }

    fn sphere(target: f64) -> impl Fn(&DesignMatrix) -> f64 {
        move |x: &DesignMatrix| x.as_slice().iter().map(|v| (v - target).powi(2)).sum()
    }

    #[test]
    fn init_counts_and_bounds() {
        let space = SearchSpace::new(6, Bounds::unit(2)).unwrap();
        let params = PsoParams::default();
        let s = SwarmState::init(&space, &params, &sphere(0.3), 9).unwrap();
        assert_eq!(s.eval_count, 150);
        assert_eq!(s.particles.len(), 150);
        for p in &s.particles {
            assert!(p.position.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
            assert!(p.velocity.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
        let min = s.particles.iter().map(|p| p.pbest_score).fold(f64::INFINITY, f64::min);
        assert_eq!(s.gbest.score, min);
        assert_eq!(s, SwarmState::init(&space, &params, &sphere(0.3), 9).unwrap());
        assert_ne!(s, SwarmState::init(&space, &params, &sphere(0.3), 10).unwrap());
    }

    #[test]
    fn step_keeps_invariants() {
        let space = SearchSpace::new(4, Bounds::unit(3)).unwrap();
        let params = PsoParams { swarm_size: 30, ..Default::default() };
        let f = sphere(0.9);
        let mut s = SwarmState::init(&space, &params, &f, 1).unwrap();
        let mut running_min: Vec<f64> = s.particles.iter().map(|p| p.score).collect();
        for t in 1..=100 {
            let before = s.gbest.score;
            s.step(&f, &params).unwrap();
            assert!(s.gbest.score <= before);
            assert_eq!(s.eval_count, 30 * (1 + t as u64));
            let min = s.particles.iter().map(|p| p.pbest_score).fold(f64::INFINITY, f64::min);
            assert_eq!(s.gbest.score, min);
            for (p, m) in s.particles.iter().zip(running_min.iter_mut()) {
                *m = m.min(p.score);
                assert_eq!(p.pbest_score, *m);
                assert_eq!(p.pbest_score, f(&p.pbest_position));
                assert!(p.position.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
                assert!(p.velocity.iter().all(|v| v.abs() <= 1.0));
            }
        }
    }

    #[test]
    fn step_is_deterministic() {
        let space = SearchSpace::new(3, Bounds::unit(2)).unwrap();
        let params = PsoParams { swarm_size: 20, ..Default::default() };
        let f = sphere(-0.2);
        let mut a = SwarmState::init(&space, &params, &f, 77).unwrap();
        let mut b = a.clone();
        for _ in 0..25 {
            a.step(&f, &params).unwrap();
            b.step(&f, &params).unwrap();
        }
        assert_eq!(a, b);
    }

    #[test]
    fn inertia_only_decays_geometrically() {
        let space = SearchSpace::new(5, Bounds::unit(2)).unwrap();
        let params = PsoParams { c1: 0.0, c2: 0.0, swarm_size: 20, ..Default::default() };
        let f = sphere(0.0);
        let mut s = SwarmState::init(&space, &params, &f, 12).unwrap();
        let max_v = |s: &SwarmState| {
            s.particles
                .iter()
                .flat_map(|p| p.velocity.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let v0 = max_v(&s);
        let mut prev = v0;
        for _ in 0..50 {
            // Components that do not hit a wall shrink by exactly omega;
            // reflected ones shrink by omega / 2.
            let olds: Vec<Vec<f64>> = s.particles.iter().map(|p| p.velocity.clone()).collect();
            s.step(&f, &params).unwrap();
            for (p, old) in s.particles.iter().zip(&olds) {
                for (v, o) in p.velocity.iter().zip(old) {
                    let free = params.omega * o;
                    assert!(*v == free || *v == -0.5 * free, "{v} vs {o}");
                }
            }
            let now = max_v(&s);
            assert!(now <= params.omega * prev * (1.0 + 1e-12));
            prev = now;
        }
        assert!(prev <= params.omega.powi(50) * v0 * (1.0 + 1e-9));
    }
}
