//! Full second-order response-surface model on `K` factors.
//!
//! Terms are laid out as: intercept, the `K` linear terms, the `K(K-1)/2`
//! two-factor interactions `x_i x_j` (`i < j`, lexicographic), then the `K`
//! pure quadratics. For `K = 3` this is
//! `1 x1 x2 x3 x1x2 x1x3 x2x3 x1^2 x2^2 x3^2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::design::{DesignMatrix, DesignPoint};
use crate::error::{Error, Result};

/// Number of parameters of the full quadratic model in `k` factors, `C(k+2, 2)`.
pub fn p_count(k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("the model needs at least one factor"));
    }
    Ok((k + 2) * (k + 1) / 2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    Intercept,
    Linear(usize),
    Interaction(usize, usize),
    Quadratic(usize),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Intercept => write!(f, "1"),
            Term::Linear(i) => write!(f, "x{}", i + 1),
            Term::Interaction(i, j) => write!(f, "x{}x{}", i + 1, j + 1),
            Term::Quadratic(i) => write!(f, "x{}^2", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    k: usize,
    terms: Vec<Term>,
}

impl ModelSpec {
    /// Full second-order model in `k` factors.
    pub fn quadratic(k: usize) -> Result<Self> {
        let p = p_count(k)?;
        let mut terms = Vec::with_capacity(p);
        terms.push(Term::Intercept);
        terms.extend((0..k).map(Term::Linear));
        for i in 0..k {
            terms.extend((i + 1..k).map(|j| Term::Interaction(i, j)));
        }
        terms.extend((0..k).map(Term::Quadratic));
        debug_assert_eq!(terms.len(), p);
        Ok(Self { k, terms })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Writes `f(x)` into `out` without validation; `x.len() == k`, `out.len() == p`.
    #[inline]
    pub(crate) fn expand_into(&self, x: &[f64], out: &mut [f64]) {
        let k = self.k;
        out[0] = 1.0;
        out[1..=k].copy_from_slice(x);
        let mut t = k + 1;
        for i in 0..k {
            for j in i + 1..k {
                out[t] = x[i] * x[j];
                t += 1;
            }
        }
        for (o, &xi) in out[t..].iter_mut().zip(x) {
            *o = xi * xi;
        }
    }

    fn check_k(&self, found: usize) -> Result<()> {
        if found != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                found,
            });
        }
        Ok(())
    }

    /// Model vector `f(x)` in term order.
    pub fn expand(&self, x: &DesignPoint) -> Result<Vec<f64>> {
        self.expand_slice(x.coords())
    }

    pub fn expand_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_k(x.len())?;
        let mut f = vec![0.0; self.p()];
        self.expand_into(x, &mut f);
        Ok(f)
    }

    /// The `N x p` model matrix `F`, row `i` being `f(x_i)`.
    pub fn model_matrix(&self, design: &DesignMatrix) -> Result<ModelMatrix> {
        self.check_k(design.k())?;
        let p = self.p();
        let mut data = vec![0.0; design.n() * p];
        for (row, out) in design.rows().zip(data.chunks_exact_mut(p)) {
            self.expand_into(row, out);
        }
        Ok(ModelMatrix {
            n: design.n(),
            p,
            data,
        })
    }

    pub(crate) fn check_design(&self, design: &DesignMatrix) -> Result<()> {
        self.check_k(design.k())
    }
}

/// Convenience form of [`ModelSpec::expand`].
pub fn model_expand(x: &DesignPoint, spec: &ModelSpec) -> Result<Vec<f64>> {
    spec.expand(x)
}

/// Convenience form of [`ModelSpec::model_matrix`].
pub fn build_model_matrix(design: &DesignMatrix, spec: &ModelSpec) -> Result<ModelMatrix> {
    spec.model_matrix(design)
}

/// Row-major `N x p` model matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl ModelMatrix {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `F'F`, packed as a dense row-major `p x p` matrix.
    pub fn gram(&self) -> Vec<f64> {
        let p = self.p;
        let mut m = vec![0.0; p * p];
        for row in self.rows() {
            for a in 0..p {
                let ra = row[a];
                for b in a..p {
                    m[a * p + b] += ra * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                m[a * p + b] = m[b * p + a];
            }
        }
        m
    }
}
