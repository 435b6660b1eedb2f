//! Design points, design matrices and the hyper-rectangular region they live in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-factor box `[lower[k], upper[k]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("bounds need at least one factor"));
        }
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "lower bounds have {} entries but upper bounds have {}",
                lower.len(),
                upper.len()
            )));
        }
        for (k, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::invalid(format!(
                    "factor {}: bounds [{lo}, {hi}] are not a finite, non-empty interval",
                    k + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The coded cube `[-1, 1]^k`.
    pub fn unit(k: usize) -> Self {
        Self {
            lower: vec![-1.0; k],
            upper: vec![1.0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    pub fn contains(&self, k: usize, value: f64) -> bool {
        value >= self.lower[k] && value <= self.upper[k]
    }
}

/// A single run of the experiment: one setting per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint(Vec<f64>);

impl DesignPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("a design point needs at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!(
                "coordinate {} is not finite ({})",
                i + 1,
                coords[i]
            )));
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[f64]> for DesignPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// An `N x K` exact design stored row-major; row `i` is the i-th experimental run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a design from row-major data. All entries must be finite.
    pub fn from_row_major(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::invalid(format!(
                "a design needs N >= 1 and K >= 1 (got N={n}, K={k})"
            )));
        }
        if data.len() != n * k {
            return Err(Error::invalid(format!(
                "{} values cannot fill a {n}x{k} design",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "row {}, column {} is not finite",
                i / k + 1,
                i % k + 1
            )));
        }
        Ok(Self { n, k, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != k {
                return Err(Error::invalid(format!(
                    "row {} has {} columns, expected {k}",
                    i + 1,
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), k, data)
    }

    pub(crate) fn zeros(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            data: vec![0.0; n * k],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.k)
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.k + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Fails with the first coordinate that lies outside `bounds`.
    pub fn check_bounds(&self, bounds: &Bounds) -> Result<()> {
        if bounds.k() != self.k {
            return Err(Error::DimensionMismatch {
                expected: bounds.k(),
                found: self.k,
            });
        }
        for (i, row) in self.rows().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if !bounds.contains(k, v) {
                    return Err(Error::invalid(format!(
                        "row {}, column {}: {v} lies outside [{}, {}]",
                        i + 1,
                        k + 1,
                        bounds.lower()[k],
                        bounds.upper()[k]
                    )));
                }
            }
        }
        Ok(())
    }
}
