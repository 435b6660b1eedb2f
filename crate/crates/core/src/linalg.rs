//! Small dense symmetric factorization used by the scorer.

/// Vectors per call of `inv_quad_form_block`.
pub(crate) const BLOCK: usize = 8;

/// Ratio below which a pivot is treated as zero relative to the largest one.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-10;

/// Cholesky factorization with symmetric (diagonal) pivoting:
/// `P A P' = L L'`, with pivots taken largest-first so the trailing pivots
/// reveal rank deficiency.
#[derive(Debug, Clone)]
pub(crate) struct PivotedCholesky {
    p: usize,
    /// Lower triangle holds `L`, row-major.
    l: Vec<f64>,
    inv_diag: Vec<f64>,
    /// `perm[r]` is the original index placed at position `r`.
    perm: Vec<usize>,
}

impl PivotedCholesky {
    /// Factorizes a symmetric positive semidefinite row-major `p x p` matrix.
    /// Returns `None` when some pivot falls below
    /// `SINGULAR_PIVOT_RATIO * largest pivot` (or the matrix is not PSD).
    pub(crate) fn new(a: &[f64], p: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), p * p);
        let mut l = a.to_vec();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut largest = 0.0;
        for j in 0..p {
            let q = (j..p)
                .max_by(|&x, &y| l[x * p + x].total_cmp(&l[y * p + y]))
                .unwrap_or(j);
            if q != j {
                swap_sym(&mut l, p, j, q);
                perm.swap(j, q);
            }
            let d = l[j * p + j];
            if j == 0 {
                largest = d;
            }
            if !d.is_finite() || d <= 0.0 || d <= SINGULAR_PIVOT_RATIO * largest {
                return None;
            }
            let ljj = d.sqrt();
            l[j * p + j] = ljj;
            for i in j + 1..p {
                l[i * p + j] /= ljj;
            }
            // Whole trailing block, both triangles: later pivot swaps read both.
            for i in j + 1..p {
                let lij = l[i * p + j];
                for c in j + 1..p {
                    l[i * p + c] -= lij * l[c * p + j];
                }
            }
        }
        for i in 0..p {
            for c in i + 1..p {
                l[i * p + c] = 0.0;
            }
        }
        let inv_diag = (0..p).map(|j| 1.0 / l[j * p + j]).collect();
        Some(Self {
            p,
            l,
            inv_diag,
            perm,
        })
    }

    /// `v' A^{-1} v`, using `work` (length `p`) as scratch.
    #[inline]
    pub(crate) fn inv_quad_form(&self, v: &[f64], work: &mut [f64]) -> f64 {
        let p = self.p;
        let mut acc = 0.0;
        for r in 0..p {
            let row = &self.l[r * p..r * p + r];
            let mut s = v[self.perm[r]];
            for (lrc, zc) in row.iter().zip(&work[..r]) {
                s -= lrc * zc;
            }
            let z = s * self.inv_diag[r];
            work[r] = z;
            acc += z * z;
        }
        acc
    }

    /// `inv_quad_form` for `BLOCK` vectors at once. `v` holds component `j`
    /// of vector `t` at `v[j * BLOCK + t]`; `work` needs `p * BLOCK` entries.
    /// Each vector sees the same operation order as `inv_quad_form`.
    pub(crate) fn inv_quad_form_block(&self, v: &[f64], work: &mut [f64], out: &mut [f64; BLOCK]) {
        let p = self.p;
        *out = [0.0; BLOCK];
        for r in 0..p {
            let src = self.perm[r] * BLOCK;
            let mut s: [f64; BLOCK] = v[src..src + BLOCK].try_into().unwrap();
            let lrow = &self.l[r * p..r * p + r];
            for (lrc, zc) in lrow.iter().zip(work.chunks_exact(BLOCK)) {
                for (st, zt) in s.iter_mut().zip(zc) {
                    *st -= lrc * zt;
                }
            }
            let d = self.inv_diag[r];
            for (st, acc) in s.iter_mut().zip(out.iter_mut()) {
                *st *= d;
                *acc += *st * *st;
            }
            work[r * BLOCK..(r + 1) * BLOCK].copy_from_slice(&s);
        }
    }

    /// Solves `A x = b`.
    #[cfg(test)]
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut z = vec![0.0; p];
        for r in 0..p {
            let mut s = b[self.perm[r]];
            for c in 0..r {
                s -= self.l[r * p + c] * z[c];
            }
            z[r] = s * self.inv_diag[r];
        }
        for r in (0..p).rev() {
            let mut s = z[r];
            for c in r + 1..p {
                s -= self.l[c * p + r] * z[c];
            }
            z[r] = s * self.inv_diag[r];
        }
        let mut x = vec![0.0; p];
        for (r, &orig) in self.perm.iter().enumerate() {
            x[orig] = z[r];
        }
        x
    }
}

fn swap_sym(a: &mut [f64], p: usize, i: usize, j: usize) {
    for c in 0..p {
        a.swap(i * p + c, j * p + c);
    }
    for r in 0..p {
        a.swap(r * p + i, r * p + j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matvec(a: &[f64], x: &[f64]) -> Vec<f64> {
        let p = x.len();
        (0..p)
            .map(|i| (0..p).map(|j| a[i * p + j] * x[j]).sum())
            .collect()
    }

    #[test]
    fn solves_spd_system() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 9.0];
        let chol = PivotedCholesky::new(&a, 3).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = chol.solve(&b);
        for (got, want) in matvec(&a, &x).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut work = [0.0; 3];
        let q = chol.inv_quad_form(&b, &mut work);
        let direct: f64 = b.iter().zip(&x).map(|(u, v)| u * v).sum();
        assert!((q - direct).abs() < 1e-12);
    }

    #[test]
    fn pivoting_reorders_correctly() {
        // Diagonal ordering forces several swaps in different positions.
        let a = [
            1.0, 0.3, 0.2, 0.1, //
            0.3, 4.0, 0.5, 0.7, //
            0.2, 0.5, 2.0, 0.4, //
            0.1, 0.7, 0.4, 9.0,
        ];
        let chol = PivotedCholesky::new(&a, 4).unwrap();
        let b = [0.5, -1.0, 2.0, 0.25];
        let x = chol.solve(&b);
        for (got, want) in matvec(&a, &x).iter().zip(&b) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        // Rank one: v v'.
        let v = [1.0, 2.0, 3.0];
        let a: Vec<f64> = (0..9).map(|i| v[i / 3] * v[i % 3]).collect();
        assert!(PivotedCholesky::new(&a, 3).is_none());
        let near = [1.0, 0.0, 0.0, 1e-12];
        assert!(PivotedCholesky::new(&near, 2).is_none());
    }
}
