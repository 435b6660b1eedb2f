//! Information matrix, scaled prediction variance and grid G-scoring.
//!
//! The G-score of a design is approximated by the maximum scaled prediction
//! variance `SPV(x) = N f(x)' (F'F)^{-1} f(x)` over a finite grid. `F'F` is
//! factorized once per design and every grid point costs one triangular solve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{Bounds, DesignMatrix, DesignPoint};
use crate::error::{Error, Result};
use crate::linalg::{PivotedCholesky, BLOCK};
use crate::model::ModelSpec;

/// Levels per factor of the grid used during the search.
pub const DEFAULT_GRID_LEVELS: usize = 5;

/// Grids with more expanded entries than this are evaluated lazily.
const MAX_CACHED_ENTRIES: usize = 1 << 23;

/// Grid points per rayon task when a grid is scored in parallel.
const PAR_CHUNK: usize = 4096;

/// `M(X) = F'F` and its factorization.
#[derive(Debug, Clone)]
pub struct InformationMatrix {
    p: usize,
    n_runs: usize,
    m: Vec<f64>,
    factor: Option<PivotedCholesky>,
}

impl InformationMatrix {
    pub fn new(design: &DesignMatrix, spec: &ModelSpec) -> Result<Self> {
        spec.check_design(design)?;
        let p = spec.p();
        let mut m = vec![0.0; p * p];
        let mut f = vec![0.0; p];
        for r in canonical_row_order(design) {
            spec.expand_into(design.row(r), &mut f);
            for a in 0..p {
                let fa = f[a];
                let dst = &mut m[a * p + a..a * p + p];
                for (d, fb) in dst.iter_mut().zip(&f[a..]) {
                    *d += fa * fb;
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                m[a * p + b] = m[b * p + a];
            }
        }
        let factor = PivotedCholesky::new(&m, p);
        Ok(Self {
            p,
            n_runs: design.n(),
            m,
            factor,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_runs(&self) -> usize {
        self.n_runs
    }

    /// Row-major `p x p` entries.
    pub fn matrix(&self) -> &[f64] {
        &self.m
    }

    /// `false` when the smallest pivot is below `1e-10` of the largest.
    pub fn regular(&self) -> bool {
        self.factor.is_some()
    }

    /// `N f' M^{-1} f` for an already expanded model vector.
    pub fn spv_expanded(&self, f: &[f64]) -> Result<f64> {
        let factor = self.factor.as_ref().ok_or(Error::SingularInformation)?;
        let mut work = vec![0.0; self.p];
        Ok(self.n_runs as f64 * factor.inv_quad_form(f, &mut work))
    }
}

/// Order in which rows are accumulated into `F'F`: by squared norm, then by
/// sorted absolute coordinates. The key ignores row order, factor order and
/// signs, so relabelled copies of a design get bit-identical information
/// matrices.
fn canonical_row_order(design: &DesignMatrix) -> Vec<usize> {
    let keys: Vec<(f64, Vec<f64>)> = design
        .rows()
        .map(|row| {
            let mut abs: Vec<f64> = row.iter().map(|v| v.abs()).collect();
            abs.sort_by(f64::total_cmp);
            (abs.iter().map(|v| v * v).sum(), abs)
        })
        .collect();
    let mut order: Vec<usize> = (0..design.n()).collect();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (&keys[a], &keys[b]);
        ka.0.total_cmp(&kb.0).then_with(|| {
            ka.1.iter()
                .zip(&kb.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    order
}

/// Scaled prediction variance of `design` at `x`.
pub fn spv(x: &DesignPoint, design: &DesignMatrix, spec: &ModelSpec) -> Result<f64> {
    let f = spec.expand(x)?;
    InformationMatrix::new(design, spec)?.spv_expanded(&f)
}

/// Full-factorial grid of prediction points.
#[derive(Debug, Clone)]
pub struct ScoringGrid {
    spec: ModelSpec,
    levels: Vec<Vec<f64>>,
    n_points: usize,
    /// Model vectors of all points when small enough to cache, stored in
    /// blocks of `BLOCK` points: term `j` of point `b * BLOCK + t` sits at
    /// `b * p * BLOCK + j * BLOCK + t`. The last block is zero padded.
    expanded: Option<Vec<f64>>,
}

impl ScoringGrid {
    /// `levels_per_factor` equally spaced levels spanning each factor's bounds.
    pub fn equispaced(spec: &ModelSpec, levels_per_factor: usize, bounds: &Bounds) -> Result<Self> {
        if levels_per_factor < 2 {
            return Err(Error::invalid(format!(
                "a grid needs at least 2 levels per factor (got {levels_per_factor})"
            )));
        }
        if bounds.k() != spec.k() {
            return Err(Error::DimensionMismatch {
                expected: spec.k(),
                found: bounds.k(),
            });
        }
        let last = (levels_per_factor - 1) as f64;
        let levels = (0..spec.k())
            .map(|k| {
                let (lo, hi) = (bounds.lower()[k], bounds.upper()[k]);
                let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                (0..levels_per_factor)
                    .map(|j| match j {
                        0 => lo,
                        j if j + 1 == levels_per_factor => hi,
                        // Written so that levels j and L-1-j mirror exactly.
                        j => mid + half * ((2 * j) as f64 - last) / last,
                    })
                    .collect()
            })
            .collect();
        Self::from_levels(spec, levels)
    }

    /// Grid over explicit per-factor levels (each strictly ascending).
    pub fn from_levels(spec: &ModelSpec, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.len() != spec.k() {
            return Err(Error::DimensionMismatch {
                expected: spec.k(),
                found: levels.len(),
            });
        }
        let mut n_points: usize = 1;
        for (k, lv) in levels.iter().enumerate() {
            if lv.is_empty() || lv.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "factor {}: grid levels must be finite and non-empty",
                    k + 1
                )));
            }
            if lv.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "factor {}: grid levels must be strictly ascending",
                    k + 1
                )));
            }
            n_points = n_points
                .checked_mul(lv.len())
                .ok_or_else(|| Error::invalid("grid is too large"))?;
        }
        let mut grid = Self {
            spec: spec.clone(),
            levels,
            n_points,
            expanded: None,
        };
        let p = spec.p();
        if n_points.saturating_mul(p) <= MAX_CACHED_ENTRIES {
            let mut expanded = vec![0.0; n_points.div_ceil(BLOCK) * BLOCK * p];
            let mut x = vec![0.0; spec.k()];
            let mut f = vec![0.0; p];
            for idx in 0..n_points {
                grid.fill_point(idx, &mut x);
                spec.expand_into(&x, &mut f);
                let base = (idx / BLOCK) * p * BLOCK + idx % BLOCK;
                for (j, fj) in f.iter().enumerate() {
                    expanded[base + j * BLOCK] = *fj;
                }
            }
            grid.expanded = Some(expanded);
        }
        Ok(grid)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Coordinates of point `idx`. Enumeration is row-major over factors:
    /// the last factor varies fastest.
    pub fn point(&self, idx: usize) -> DesignPoint {
        let mut x = vec![0.0; self.spec.k()];
        self.fill_point(idx, &mut x);
        DesignPoint::new(x).expect("grid levels are finite")
    }

    pub fn points(&self) -> impl Iterator<Item = DesignPoint> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    fn fill_point(&self, mut idx: usize, x: &mut [f64]) {
        for (xk, lv) in x.iter_mut().zip(&self.levels).rev() {
            *xk = lv[idx % lv.len()];
            idx /= lv.len();
        }
    }

    /// Largest `f' M^{-1} f` (unscaled) over points `range`, first index wins ties.
    fn max_over(&self, factor: &PivotedCholesky, range: std::ops::Range<usize>) -> (f64, usize) {
        let p = self.spec.p();
        let mut best = (f64::NEG_INFINITY, range.start);
        match &self.expanded {
            Some(expanded) => {
                let mut work = vec![0.0; p * BLOCK];
                let mut q = [0.0; BLOCK];
                let mut b = range.start / BLOCK;
                while b * BLOCK < range.end {
                    factor.inv_quad_form_block(&expanded[b * p * BLOCK..(b + 1) * p * BLOCK], &mut work, &mut q);
                    let lo = range.start.max(b * BLOCK);
                    let hi = range.end.min((b + 1) * BLOCK);
                    for idx in lo..hi {
                        if q[idx - b * BLOCK] > best.0 {
                            best = (q[idx - b * BLOCK], idx);
                        }
                    }
                    b += 1;
                }
            }
            None => {
                let mut x = vec![0.0; self.spec.k()];
                let mut f = vec![0.0; p];
                let mut work = vec![0.0; p];
                for idx in range {
                    self.fill_point(idx, &mut x);
                    self.spec.expand_into(&x, &mut f);
                    let q = factor.inv_quad_form(&f, &mut work);
                    if q > best.0 {
                        best = (q, idx);
                    }
                }
            }
        }
        best
    }

    /// Scores `info` over the grid; `parallel` splits the grid across the
    /// rayon pool with a reduction that keeps the sequential tie-break.
    pub fn score_information(&self, info: &InformationMatrix, parallel: bool) -> GScore {
        let Some(factor) = info.factor.as_ref() else {
            return GScore::singular();
        };
        let (q, idx) = if parallel && self.n_points > PAR_CHUNK {
            let chunks = self.n_points.div_ceil(PAR_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let start = c * PAR_CHUNK;
                    self.max_over(factor, start..(start + PAR_CHUNK).min(self.n_points))
                })
                .reduce(
                    || (f64::NEG_INFINITY, usize::MAX),
                    |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
                )
        } else {
            self.max_over(factor, 0..self.n_points)
        };
        GScore {
            value: info.n_runs as f64 * q,
            argmax: Some(self.point(idx)),
            argmax_index: Some(idx),
            n_spv_evals: self.n_points,
        }
    }

    pub fn score(&self, design: &DesignMatrix) -> Result<GScore> {
        let info = InformationMatrix::new(design, &self.spec)?;
        Ok(self.score_information(&info, false))
    }

    /// G-score as a plain objective value: `+inf` for singular designs.
    pub fn objective(&self, design: &DesignMatrix) -> f64 {
        match InformationMatrix::new(design, &self.spec) {
            Ok(info) => self.score_information(&info, false).value,
            Err(_) => f64::INFINITY,
        }
    }
}

/// Grid over `bounds` with `levels_per_factor` equally spaced levels.
pub fn make_grid(spec: &ModelSpec, levels_per_factor: usize, bounds: &Bounds) -> Result<ScoringGrid> {
    ScoringGrid::equispaced(spec, levels_per_factor, bounds)
}

/// Maximum SPV of a design over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GScore {
    /// `+inf` when the information matrix is singular.
    pub value: f64,
    pub argmax: Option<DesignPoint>,
    pub argmax_index: Option<usize>,
    pub n_spv_evals: usize,
}

impl GScore {
    fn singular() -> Self {
        Self {
            value: f64::INFINITY,
            argmax: None,
            argmax_index: None,
            n_spv_evals: 0,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.value.is_infinite()
    }
}

pub fn g_score(design: &DesignMatrix, grid: &ScoringGrid, spec: &ModelSpec) -> Result<GScore> {
    if grid.spec() != spec {
        return Err(Error::invalid("grid was built for a different model"));
    }
    grid.score(design)
}

/// `100 p / G`; a singular design (`G = +inf`) has efficiency 0.
pub fn g_efficiency(g: f64, p: usize) -> Result<f64> {
    if g.is_nan() || g <= 0.0 {
        return Err(Error::invalid(format!("G-score must be positive (got {g})")));
    }
    if p == 0 {
        return Err(Error::invalid("parameter count must be positive"));
    }
    if g.is_infinite() {
        return Ok(0.0);
    }
    Ok(100.0 * p as f64 / g)
}

/// `100 eff_a / eff_b`.
pub fn relative_efficiency(eff_a: f64, eff_b: f64) -> Result<f64> {
    if eff_b.is_nan() || eff_b <= 0.0 {
        return Err(Error::invalid(format!(
            "reference efficiency must be positive (got {eff_b})"
        )));
    }
    if !eff_a.is_finite() || eff_a < 0.0 {
        return Err(Error::invalid(format!("efficiency must be finite and >= 0 (got {eff_a})")));
    }
    Ok(100.0 * eff_a / eff_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k1_saturated() -> (ModelSpec, DesignMatrix) {
        let spec = ModelSpec::quadratic(1).unwrap();
        let x = DesignMatrix::from_rows(&[[-1.0], [0.0], [1.0]]).unwrap();
        (spec, x)
    }

    fn lagrange_sq_sum(t: f64) -> f64 {
        // Lagrange basis on nodes {-1, 0, 1}.
        let l0 = t * (t - 1.0) / 2.0;
        let l1 = (t + 1.0) * (t - 1.0) / -1.0;
        let l2 = t * (t + 1.0) / 2.0;
        l0 * l0 + l1 * l1 + l2 * l2
    }

    #[test]
    fn spv_of_saturated_one_factor_design() {
        let (spec, x) = k1_saturated();
        let at = |t: f64| spv(&DesignPoint::new(vec![t]).unwrap(), &x, &spec).unwrap();
        assert_relative_eq!(at(1.0), 3.0, max_relative = 1e-12);
        assert_relative_eq!(at(0.5), 2.15625, max_relative = 1e-12);
        for t in [-0.9, -0.3, 0.25, 0.8] {
            assert_relative_eq!(at(t), 3.0 * lagrange_sq_sum(t), max_relative = 1e-12);
        }
    }

    #[test]
    fn undersized_design_is_singular() {
        let spec = ModelSpec::quadratic(2).unwrap();
        let x = DesignMatrix::from_rows(&[[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
            .unwrap();
        let pt = DesignPoint::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(spv(&pt, &x, &spec), Err(Error::SingularInformation)));
        let grid = make_grid(&spec, 5, &Bounds::unit(2)).unwrap();
        assert!(g_score(&x, &grid, &spec).unwrap().is_singular());
    }

    #[test]
    fn default_grid_levels() {
        let spec = ModelSpec::quadratic(1).unwrap();
        let grid = make_grid(&spec, 5, &Bounds::unit(1)).unwrap();
        assert_eq!(grid.levels()[0], [-1.0, -0.5, 0.0, 0.5, 1.0]);
        for (k, n) in [(4, 625), (5, 3125)] {
            let spec = ModelSpec::quadratic(k).unwrap();
            assert_eq!(make_grid(&spec, 5, &Bounds::unit(k)).unwrap().len(), n);
        }
        assert!(make_grid(&spec, 1, &Bounds::unit(1)).is_err());
    }

    #[test]
    fn grid_enumeration_is_row_major() {
        let spec = ModelSpec::quadratic(2).unwrap();
        let grid = make_grid(&spec, 3, &Bounds::unit(2)).unwrap();
        let pts: Vec<Vec<f64>> = grid.points().map(|p| p.coords().to_vec()).collect();
        assert_eq!(pts[0], [-1.0, -1.0]);
        assert_eq!(pts[1], [-1.0, 0.0]);
        assert_eq!(pts[3], [0.0, -1.0]);
        assert_eq!(pts[8], [1.0, 1.0]);
    }

    #[test]
    fn asymmetric_bounds_map_levels_affinely() {
        let spec = ModelSpec::quadratic(1).unwrap();
        let b = Bounds::new(vec![0.0], vec![10.0]).unwrap();
        let grid = make_grid(&spec, 5, &b).unwrap();
        assert_eq!(grid.levels()[0], [0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn g_score_of_saturated_one_factor_design() {
        let (spec, x) = k1_saturated();
        let grid = make_grid(&spec, 5, &Bounds::unit(1)).unwrap();
        let g = g_score(&x, &grid, &spec).unwrap();
        assert_relative_eq!(g.value, 3.0, max_relative = 1e-12);
        // SPV is 3 at all three nodes, equal only up to rounding.
        let at = g.argmax.unwrap().coords()[0];
        assert!([-1.0, 0.0, 1.0].contains(&at), "{at}");
        assert_eq!(g.n_spv_evals, 5);

        let repeated = DesignMatrix::from_rows(&[[0.0], [0.0], [0.0]]).unwrap();
        let g = g_score(&repeated, &grid, &spec).unwrap();
        assert!(g.value.is_infinite() && g.argmax.is_none());
    }

    #[test]
    fn exact_ties_take_first_point() {
        // With M = I, SPV(x) = 1 + x^2 + x^4, exactly equal at -1 and 1.
        let spec = ModelSpec::quadratic(1).unwrap();
        let grid = make_grid(&spec, 5, &Bounds::unit(1)).unwrap();
        let m = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let info = InformationMatrix {
            p: 3,
            n_runs: 1,
            factor: PivotedCholesky::new(&m, 3),
            m,
        };
        let g = grid.score_information(&info, false);
        assert_eq!(g.value, 3.0);
        assert_eq!(g.argmax_index, Some(0));
        assert_eq!(grid.score_information(&info, true), g);
    }

    #[test]
    fn lazy_and_cached_grids_agree() {
        let spec = ModelSpec::quadratic(2).unwrap();
        let x = DesignMatrix::from_rows(&[
            [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0], [0.0, 0.1], [0.3, -0.7], [-0.2, 0.6],
        ])
        .unwrap();
        let mut grid = make_grid(&spec, 9, &Bounds::unit(2)).unwrap();
        let cached = grid.score(&x).unwrap();
        grid.expanded = None;
        let lazy = grid.score(&x).unwrap();
        assert_eq!(cached, lazy);
        let info = InformationMatrix::new(&x, &spec).unwrap();
        assert_eq!(grid.score_information(&info, true), lazy);
    }

    #[test]
    fn efficiency_measures() {
        assert_eq!(g_efficiency(10.0, 10).unwrap(), 100.0);
        assert_eq!(g_efficiency(f64::INFINITY, 3).unwrap(), 0.0);
        assert!(g_efficiency(0.0, 3).is_err());
        assert!(g_efficiency(-1.0, 3).is_err());
        // 15 parameters at the reported 71.09% efficiency.
        assert_relative_eq!(g_efficiency(1500.0 / 71.09, 15).unwrap(), 71.09, max_relative = 1e-12);
        assert_relative_eq!(g_efficiency(2100.0 / 68.67, 21).unwrap(), 68.67, max_relative = 1e-12);

        assert!((relative_efficiency(71.09, 48.89).unwrap() - 145.41).abs() < 0.01);
        assert!((relative_efficiency(73.19, 73.02).unwrap() - 100.24).abs() < 0.01);
        assert_eq!(relative_efficiency(42.0, 42.0).unwrap(), 100.0);
        assert!(relative_efficiency(1.0, 0.0).is_err());
    }
}
