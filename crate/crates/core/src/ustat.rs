//! Distinct-index fourth-order U-statistic kernels.
//!
//! Two routes compute each statistic: an exact brute-force enumeration
//! over all ordered distinct 4-tuples (the oracle, feasible for small
//! `n`) and an algebraically reduced fast path that contracts a single
//! weighted Gram matrix in `O(n^2)` after an `O(n^2 p)` build. The
//! reduction is derived in `docs/ustat_reduction.md` and frozen by the
//! equivalence tests in this module.
//!
//! One weighted kernel serves both statistics: with weights `1/sigma_k^2`
//! it is the scale-invariant (SF) core, with unit weights the ZC core.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::linalg::Matrix;
use crate::model::{DiagScaling, ResidualVector};

/// Symmetric `n x n` matrix of weighted pairwise inner products
/// `A_ij = X_i' W X_j` with diagonal weight `W`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    a: Vec<f64>,
}

impl GramMatrix {
    /// Builds the Gram matrix with `W = diag(weights.inverse())`.
    pub fn build(x: &Matrix, weights: &DiagScaling) -> Result<GramMatrix> {
        let n = x.nrows();
        let p = x.ncols();
        if weights.len() != p {
            return Err(Error::DimensionMismatch {
                what: "weight vector vs design columns",
                expected: p,
                got: weights.len(),
            });
        }
        let w = weights.inverse();
        let mut a = alloc::vec![0.0; n * n];
        for i in 0..n {
            let xi = x.row(i);
            for j in i..n {
                let xj = x.row(j);
                let mut s = 0.0;
                for k in 0..p {
                    s += xi[k] * w[k] * xj[k];
                }
                a[i * n + j] = s;
                a[j * n + i] = s;
            }
        }
        Ok(GramMatrix { n, a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
}

fn perm4(n: usize) -> f64 {
    (n * (n - 1) * (n - 2) * (n - 3)) as f64
}

fn require_n4(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::SampleTooSmall { required: 4, got: n });
    }
    Ok(())
}

fn weighted_diff_dot(xi: &[f64], xj: &[f64], xk: &[f64], xl: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for m in 0..w.len() {
        s += (xi[m] - xj[m]) * w[m] * (xk[m] - xl[m]);
    }
    s
}

/// Exact enumeration of the weighted difference kernel
/// `sum* (X_i1 - X_i2)' W (X_i3 - X_i4) (d_i1 - d_i2)(d_i3 - d_i4)`
/// over ordered distinct 4-tuples, divided by `4 P_n^4`.
pub fn tn_core_bruteforce(
    x: &Matrix,
    delta: &ResidualVector,
    weights: &DiagScaling,
) -> Result<f64> {
    let n = x.nrows();
    require_n4(n)?;
    if delta.len() != n {
        return Err(Error::DimensionMismatch {
            what: "residual length vs design rows",
            expected: n,
            got: delta.len(),
        });
    }
    let d = delta.as_slice();
    let w = weights.inverse();
    let mut acc = KahanSum::new();
    for i1 in 0..n {
        for i2 in 0..n {
            if i2 == i1 {
                continue;
            }
            for i3 in 0..n {
                if i3 == i1 || i3 == i2 {
                    continue;
                }
                for i4 in 0..n {
                    if i4 == i1 || i4 == i2 || i4 == i3 {
                        continue;
                    }
                    let a = weighted_diff_dot(x.row(i1), x.row(i2), x.row(i3), x.row(i4), w);
                    acc.add(a * (d[i1] - d[i2]) * (d[i3] - d[i4]));
                }
            }
        }
    }
    Ok(acc.value() / (4.0 * perm4(n)))
}

/// Fast evaluation of the same kernel via Gram-matrix contractions.
///
/// With `A_ij = X_i' W X_j` and the inclusion-exclusion expansion of the
/// distinct-index sum (see `docs/ustat_reduction.md`),
///
/// ```text
/// T = [ (n-2)(n-3) S2 - 2(n-3) T3 + T4 ] / P_n^4
/// ```
///
/// where `S2`, `T3`, `T4` are the pair, triple and quadruple
/// distinct-index contractions of `A` against `d`.
pub fn tn_core_fast(x: &Matrix, delta: &ResidualVector, weights: &DiagScaling) -> Result<f64> {
    let n = x.nrows();
    require_n4(n)?;
    if delta.len() != n {
        return Err(Error::DimensionMismatch {
            what: "residual length vs design rows",
            expected: n,
            got: delta.len(),
        });
    }
    let gram = GramMatrix::build(x, weights)?;
    Ok(tn_core_from_gram(&gram, delta.as_slice()))
}

/// Same contraction given a prebuilt Gram matrix (lets callers reuse the
/// `O(n^2 p)` build across the statistic and the trace estimator).
pub fn tn_core_from_gram(gram: &GramMatrix, d: &[f64]) -> f64 {
    let n = gram.n();
    debug_assert!(n >= 4);
    debug_assert_eq!(d.len(), n);

    let s_d: f64 = d.iter().sum();
    let q_d: f64 = d.iter().map(|v| v * v).sum();

    // Row sums r_i = (A 1)_i, diagonal, and the mixed contractions.
    let mut dad = 0.0; // d' A d
    let mut one_a_d = 0.0; // 1' A d
    let mut diag_d = 0.0; // sum_i A_ii d_i
    let mut diag_d2 = 0.0; // sum_i A_ii d_i^2
    let mut tr_a = 0.0;
    let mut tot_a = 0.0;
    let mut r_dot_d = 0.0; // sum_i r_i d_i
    let mut r_dot_d2 = 0.0; // sum_i r_i d_i^2
    for i in 0..n {
        let mut r_i = 0.0;
        let mut ad_i = 0.0;
        for j in 0..n {
            let a = gram.at(i, j);
            r_i += a;
            ad_i += a * d[j];
        }
        dad += d[i] * ad_i;
        one_a_d += ad_i;
        tot_a += r_i;
        r_dot_d += r_i * d[i];
        r_dot_d2 += r_i * d[i] * d[i];
        let aii = gram.at(i, i);
        tr_a += aii;
        diag_d += aii * d[i];
        diag_d2 += aii * d[i] * d[i];
    }

    // S2 = sum_{i != j} A_ij d_i d_j
    let s2 = dad - diag_d2;
    // T3 = sum_{i,j,k distinct} A_ij d_i d_k
    let t3 = s_d * one_a_d - s_d * diag_d - r_dot_d2 - dad + 2.0 * diag_d2;
    // T4 = sum_{i,j,k,l distinct} A_ij d_k d_l
    let off_a = tot_a - tr_a;
    let t4 = (s_d * s_d - q_d) * off_a - 4.0 * s_d * (r_dot_d - diag_d)
        + 4.0 * (r_dot_d2 - diag_d2)
        + 2.0 * s2;

    let nf = n as f64;
    ((nf - 2.0) * (nf - 3.0) * s2 - 2.0 * (nf - 3.0) * t3 + t4) / perm4(n)
}

/// Exact enumeration of the trace estimator
/// `(1 / 2 P_n^4) sum* (X_i1 - X_i2)' W (X_i3 - X_i4)
///                    (X_i3 - X_i2)' W (X_i1 - X_i4)`.
pub fn trace_r2_bruteforce(x: &Matrix, weights: &DiagScaling) -> Result<f64> {
    let n = x.nrows();
    require_n4(n)?;
    let w = weights.inverse();
    let mut acc = KahanSum::new();
    for i1 in 0..n {
        for i2 in 0..n {
            if i2 == i1 {
                continue;
            }
            for i3 in 0..n {
                if i3 == i1 || i3 == i2 {
                    continue;
                }
                for i4 in 0..n {
                    if i4 == i1 || i4 == i2 || i4 == i3 {
                        continue;
                    }
                    let a = weighted_diff_dot(x.row(i1), x.row(i2), x.row(i3), x.row(i4), w);
                    let b = weighted_diff_dot(x.row(i3), x.row(i2), x.row(i1), x.row(i4), w);
                    acc.add(a * b);
                }
            }
        }
    }
    Ok(acc.value() / (2.0 * perm4(n)))
}

/// Fast evaluation of the trace estimator as the three-term expansion
///
/// ```text
/// (1/P_n^2) sum*_{ij} A_ij^2
///   - (2/P_n^3) sum*_{ijk} A_ij A_jk
///   + (1/P_n^4) sum*_{ijkl} A_ij A_kl
/// ```
///
/// each term contracted from the Gram matrix with distinct-index
/// corrections.
pub fn trace_r2_fast(x: &Matrix, weights: &DiagScaling) -> Result<f64> {
    let n = x.nrows();
    require_n4(n)?;
    let gram = GramMatrix::build(x, weights)?;
    Ok(trace_r2_from_gram(&gram))
}

/// Same contraction given a prebuilt Gram matrix.
pub fn trace_r2_from_gram(gram: &GramMatrix) -> f64 {
    let n = gram.n();
    debug_assert!(n >= 4);
    let nf = n as f64;

    let mut frob2 = 0.0; // sum_{ij} A_ij^2
    let mut tr_a = 0.0;
    let mut tot_a = 0.0;
    let mut diag_sq = 0.0; // sum_i A_ii^2
    let mut row_sq = 0.0; // sum_i r_i^2
    let mut diag_row = 0.0; // sum_i A_ii r_i
    for i in 0..n {
        let mut r_i = 0.0;
        for j in 0..n {
            let a = gram.at(i, j);
            r_i += a;
            frob2 += a * a;
        }
        let aii = gram.at(i, i);
        tr_a += aii;
        tot_a += r_i;
        diag_sq += aii * aii;
        row_sq += r_i * r_i;
        diag_row += aii * r_i;
    }

    // Q1 = sum_{i != j} A_ij^2
    let q1 = frob2 - diag_sq;
    // Q2 = sum_{i,j,k distinct} A_ij A_jk
    let q2 = row_sq - 2.0 * diag_row - frob2 + 2.0 * diag_sq;
    // Q3 = sum_{i,j,k,l distinct} A_ij A_kl
    let off_a = tot_a - tr_a;
    let q3 = off_a * off_a - 4.0 * row_sq + 8.0 * diag_row - 4.0 * diag_sq + 2.0 * q1;

    let p2 = nf * (nf - 1.0);
    let p3 = p2 * (nf - 2.0);
    let p4 = p3 * (nf - 3.0);
    q1 / p2 - 2.0 * q2 / p3 + q3 / p4
}
