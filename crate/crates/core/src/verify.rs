//! Independent checks on G-scores: rescoring on finer grids or random
//! samples, auditing design files, and a brute-force scorer that shares no
//! code with the main scoring path.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::design::{Bounds, DesignMatrix, DesignPoint};
use crate::design_io::read_design_csv;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::scoring::{g_efficiency, InformationMatrix, ScoringGrid, DEFAULT_GRID_LEVELS};

pub const DEFAULT_FINE_LEVELS: usize = 21;
/// Relative fine-vs-coarse gap (percent) above which a score is flagged.
pub const SUSPECT_DISCREPANCY_PCT: f64 = 2.0;
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

const MC_CHUNK: usize = 16_384;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FineMode {
    /// Full grid with `fine_levels` levels per factor.
    Grid,
    /// Coarse grid plus `samples` uniform random points.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct RescoreOptions {
    pub bounds: Bounds,
    pub coarse_levels: usize,
    pub fine_levels: usize,
    pub mode: FineMode,
}

impl RescoreOptions {
    pub fn new(k: usize, fine_levels: usize) -> Self {
        Self {
            bounds: Bounds::unit(k),
            coarse_levels: DEFAULT_GRID_LEVELS,
            fine_levels,
            mode: FineMode::Grid,
        }
    }

    /// 21-level grid up to four factors, Monte Carlo sampling beyond.
    pub fn default_for(k: usize) -> Self {
        let mut o = Self::new(k, DEFAULT_FINE_LEVELS);
        if k >= 5 {
            o.mode = FineMode::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed: 0,
            };
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescoreReport {
    pub coarse_g: f64,
    pub fine_g: f64,
    pub fine_levels: usize,
    /// Set when the fine score came from random sampling.
    pub monte_carlo_samples: Option<usize>,
    pub argmax_fine: Option<DesignPoint>,
    /// `100 (fine - coarse) / coarse`; zero for singular designs.
    pub discrepancy_pct: f64,
    pub coarse_g_eff: f64,
    pub fine_g_eff: f64,
    pub singular: bool,
    pub suspect: bool,
}

/// Rescores on `[-1, 1]^K` with a `fine_levels` grid.
pub fn rescore_fine(design: &DesignMatrix, spec: &ModelSpec, fine_levels: usize) -> Result<RescoreReport> {
    rescore_with(design, spec, &RescoreOptions::new(spec.k(), fine_levels))
}

pub fn rescore_with(design: &DesignMatrix, spec: &ModelSpec, opts: &RescoreOptions) -> Result<RescoreReport> {
    if opts.fine_levels < DEFAULT_GRID_LEVELS {
        return Err(Error::invalid(format!(
            "fine grid needs at least {DEFAULT_GRID_LEVELS} levels (got {})",
            opts.fine_levels
        )));
    }
    let info = InformationMatrix::new(design, spec)?;
    let coarse = ScoringGrid::equispaced(spec, opts.coarse_levels, &opts.bounds)?.score_information(&info, true);
    let mc_samples = match opts.mode {
        FineMode::Grid => None,
        FineMode::MonteCarlo { samples, .. } => Some(samples),
    };
    if !info.regular() {
        return Ok(RescoreReport {
            coarse_g: f64::INFINITY,
            fine_g: f64::INFINITY,
            fine_levels: opts.fine_levels,
            monte_carlo_samples: mc_samples,
            argmax_fine: None,
            discrepancy_pct: 0.0,
            coarse_g_eff: 0.0,
            fine_g_eff: 0.0,
            singular: true,
            suspect: false,
        });
    }
    let (fine_g, argmax_fine) = match opts.mode {
        FineMode::Grid => {
            let fine = ScoringGrid::equispaced(spec, opts.fine_levels, &opts.bounds)?.score_information(&info, true);
            (fine.value, fine.argmax)
        }
        FineMode::MonteCarlo { samples, seed } => {
            let (v, x) = monte_carlo_max(&info, spec, &opts.bounds, samples, seed)?;
            if v > coarse.value {
                (v, Some(x))
            } else {
                (coarse.value, coarse.argmax.clone())
            }
        }
    };
    let discrepancy_pct = 100.0 * (fine_g - coarse.value) / coarse.value;
    Ok(RescoreReport {
        coarse_g: coarse.value,
        fine_g,
        fine_levels: opts.fine_levels,
        monte_carlo_samples: mc_samples,
        argmax_fine,
        discrepancy_pct,
        coarse_g_eff: g_efficiency(coarse.value, spec.p())?,
        fine_g_eff: g_efficiency(fine_g, spec.p())?,
        singular: false,
        suspect: discrepancy_pct > SUSPECT_DISCREPANCY_PCT,
    })
}

/// Max SPV over uniform samples. Chunk `c` draws from its own stream seeded
/// with `seed + c`, so the result does not depend on the thread count.
fn monte_carlo_max(
    info: &InformationMatrix,
    spec: &ModelSpec,
    bounds: &Bounds,
    samples: usize,
    seed: u64,
) -> Result<(f64, DesignPoint)> {
    if samples == 0 {
        return Err(Error::invalid("Monte Carlo mode needs at least one sample"));
    }
    let k = spec.k();
    let chunks = samples.div_ceil(MC_CHUNK);
    let (value, point) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut x = vec![0.0; k];
            let mut best = (f64::NEG_INFINITY, Vec::new());
            for _ in 0..count {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = bounds.lower()[j] + bounds.width(j) * rng.random::<f64>();
                }
                let f = spec.expand_slice(&x).expect("k matches");
                let v = info.spv_expanded(&f).unwrap_or(f64::INFINITY);
                if v > best.0 {
                    best = (v, x.clone());
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, Vec::new()), |a, b| if b.0 > a.0 { b } else { a });
    Ok((value, DesignPoint::new(point)?))
}

/// Reads a design CSV, checks it against `spec` and `[-1, 1]^K`, and rescores it.
pub fn audit_design_file(path: &Path, spec: &ModelSpec, fine_levels: usize) -> Result<RescoreReport> {
    let mut opts = RescoreOptions::new(spec.k(), fine_levels);
    if spec.k() >= 5 {
        opts.mode = FineMode::MonteCarlo {
            samples: DEFAULT_MC_SAMPLES,
            seed: 0,
        };
    }
    audit_design_file_with(path, spec, &opts)
}

pub fn audit_design_file_with(path: &Path, spec: &ModelSpec, opts: &RescoreOptions) -> Result<RescoreReport> {
    let design = read_design_csv(path)?;
    if design.k() != spec.k() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("design has {} columns but the model has K = {}", design.k(), spec.k()),
        });
    }
    design.check_bounds(&opts.bounds).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    rescore_with(&design, spec, opts)
}

/// Max SPV over the 5-level grid on `[-1, 1]^K`, computed from scratch:
/// monomials enumerated by exponent vector, `F'F` inverted by Gauss-Jordan
/// elimination, and `f' M^{-1} f` evaluated as a plain double sum.
/// Returns `+inf` for singular designs. Meant for small models.
pub fn brute_force_check(design: &DesignMatrix, spec: &ModelSpec) -> Result<f64> {
    let k = spec.k();
    if design.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: design.k(),
        });
    }
    let exponents = quadratic_exponents(k);
    let monomials = |x: &[f64]| -> Vec<f64> {
        exponents
            .iter()
            .map(|e| x.iter().zip(e).map(|(xi, &pow)| xi.powi(pow)).product())
            .collect()
    };
    let p = exponents.len();
    let mut m = vec![vec![0.0; p]; p];
    for row in design.rows() {
        let f = monomials(row);
        for a in 0..p {
            for b in 0..p {
                m[a][b] += f[a] * f[b];
            }
        }
    }
    let Some(inv) = gauss_jordan_inverse(m) else {
        return Ok(f64::INFINITY);
    };
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut best = f64::NEG_INFINITY;
    let mut digits = vec![0usize; k];
    loop {
        let x: Vec<f64> = digits.iter().map(|&d| levels[d]).collect();
        let f = monomials(&x);
        let mut q = 0.0;
        for a in 0..p {
            for b in 0..p {
                q += f[a] * inv[a][b] * f[b];
            }
        }
        best = best.max(design.n() as f64 * q);
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(best);
            }
            digits[pos] += 1;
            if digits[pos] < levels.len() {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// All exponent vectors of total degree at most 2.
fn quadratic_exponents(k: usize) -> Vec<Vec<i32>> {
    fn rec(k: usize, budget: i32, prefix: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(k, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, 2, &mut Vec::with_capacity(k), &mut out);
    out
}

fn gauss_jordan_inverse(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let p = a.len();
    let scale = (0..p).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let mut inv: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for j in 0..p {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..p {
            if i != col {
                let factor = a[i][col];
                if factor != 0.0 {
                    for j in 0..p {
                        a[i][j] -= factor * a[col][j];
                        inv[i][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_io::write_design_csv;
    use crate::scoring::make_grid;

    fn k1_saturated() -> DesignMatrix {
        DesignMatrix::from_rows(&[[-1.0], [0.0], [1.0]]).unwrap()
    }

    fn random_design(n: usize, k: usize, seed: u64) -> DesignMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * k).map(|_| rng.random_range(-1.0..=1.0)).collect();
        DesignMatrix::from_row_major(n, k, data).unwrap()
    }

    #[test]
    fn exponent_enumeration_counts() {
        for k in 1..=5 {
            assert_eq!(quadratic_exponents(k).len(), crate::model::p_count(k).unwrap());
        }
    }

    #[test]
    fn saturated_design_is_exact_on_fine_grid() {
        let spec = ModelSpec::quadratic(1).unwrap();
        let r = rescore_fine(&k1_saturated(), &spec, 21).unwrap();
        assert!((r.coarse_g - 3.0).abs() < 1e-12);
        assert!((r.fine_g - 3.0).abs() < 1e-12);
        assert!(r.discrepancy_pct.abs() < 1e-9);
        assert!(!r.suspect);
        assert!((brute_force_check(&k1_saturated(), &spec).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_grids_agree() {
        let spec = ModelSpec::quadratic(2).unwrap();
        let x = random_design(8, 2, 4);
        let r = rescore_fine(&x, &spec, 5).unwrap();
        assert_eq!(r.fine_g, r.coarse_g);
        assert!(rescore_fine(&x, &spec, 3).is_err());
    }

    #[test]
    fn fine_grid_dominates_coarse() {
        let spec = ModelSpec::quadratic(2).unwrap();
        for seed in 0..20 {
            let x = random_design(7, 2, seed);
            let r = rescore_fine(&x, &spec, 21).unwrap();
            assert!(r.fine_g >= r.coarse_g - 1e-12);
        }
    }

    #[test]
    fn singular_design_reports_infinity() {
        let spec = ModelSpec::quadratic(1).unwrap();
        let x = DesignMatrix::from_rows(&[[0.5], [0.5], [0.5]]).unwrap();
        let r = rescore_fine(&x, &spec, 21).unwrap();
        assert!(r.singular && r.coarse_g.is_infinite() && r.fine_g.is_infinite());
        assert_eq!(brute_force_check(&x, &spec).unwrap(), f64::INFINITY);
    }

    #[test]
    fn monte_carlo_mode_is_deterministic_and_bounded_below() {
        let spec = ModelSpec::quadratic(2).unwrap();
        let x = random_design(9, 2, 8);
        let mut opts = RescoreOptions::new(2, 21);
        opts.mode = FineMode::MonteCarlo { samples: 50_000, seed: 3 };
        let a = rescore_with(&x, &spec, &opts).unwrap();
        let b = rescore_with(&x, &spec, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.fine_g >= a.coarse_g);
        assert_eq!(a.monte_carlo_samples, Some(50_000));
    }

    #[test]
    fn brute_force_matches_grid_scorer() {
        for k in 1..=3 {
            let spec = ModelSpec::quadratic(k).unwrap();
            let grid = make_grid(&spec, 5, &Bounds::unit(k)).unwrap();
            for seed in 0..10 {
                let x = random_design(spec.p() + 3, k, 100 + seed);
                let fast = grid.score(&x).unwrap().value;
                let slow = brute_force_check(&x, &spec).unwrap();
                assert!((fast - slow).abs() <= 1e-9 * slow, "k={k}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn audit_checks_shape_and_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_design_csv(&path, &k1_saturated()).unwrap();
        let spec1 = ModelSpec::quadratic(1).unwrap();
        let r = audit_design_file(&path, &spec1, 21).unwrap();
        assert!((r.coarse_g_eff - 100.0).abs() < 1e-9);

        let spec2 = ModelSpec::quadratic(2).unwrap();
        let wide = dir.path().join("wide.csv");
        write_design_csv(&wide, &random_design(6, 2, 1)).unwrap();
        let err = audit_design_file(&wide, &spec1, 21).unwrap_err().to_string();
        assert!(err.contains("columns"), "{err}");
        assert!(audit_design_file(&wide, &spec2, 21).is_ok());

        let outside = dir.path().join("out.csv");
        std::fs::write(&outside, "x1\n-1\n0\n1.5\n").unwrap();
        let err = audit_design_file(&outside, &spec1, 21).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
    }
}
