//! Minimal dense linear algebra: a row-major matrix, the handful of
//! products the power formulas need, and a Householder QR used by the
//! F-test.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: c,
                    got: row.len(),
                });
            }
            let _ = i;
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `A x` for a vector of length `ncols`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), x))
            .collect()
    }

    /// `A' x` for a vector of length `nrows`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residual sum of squares of `y` regressed on the columns of `a`,
/// by Householder QR.
///
/// Returns the RSS together with the ratio `max|r_kk| / min|r_kk|` of
/// the triangular factor, used as a cheap condition estimate. Requires
/// `a.nrows() > a.ncols()`.
pub fn qr_rss(a: &Matrix, y: &[f64]) -> Result<(f64, f64)> {
    let n = a.nrows();
    let k = a.ncols();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "response length",
            expected: n,
            got: y.len(),
        });
    }
    if n <= k {
        return Err(Error::NotApplicable("need more rows than columns for QR"));
    }
    // Work on column-major copies so each reflector touches contiguous data.
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| (0..n).map(|i| a[(i, j)]).collect()).collect();
    let mut rhs: Vec<f64> = y.to_vec();

    let mut diag_max = 0.0f64;
    let mut diag_min = f64::INFINITY;

    for step in 0..k {
        // Householder vector for cols[step][step..].
        let norm = libm::sqrt(cols[step][step..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            diag_min = 0.0;
            continue;
        }
        let alpha = if cols[step][step] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[step][step..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in cols.iter_mut().skip(step) {
                apply_reflector(&v, &mut col[step..], vnorm2);
            }
            apply_reflector(&v, &mut rhs[step..], vnorm2);
        }
        let r_kk = cols[step][step].abs();
        diag_max = diag_max.max(r_kk);
        diag_min = diag_min.min(r_kk);
    }

    let rss: f64 = rhs[k..].iter().map(|v| v * v).sum();
    let cond = if diag_min > 0.0 {
        diag_max / diag_min
    } else {
        f64::INFINITY
    };
    Ok((rss, cond))
}

fn apply_reflector(v: &[f64], target: &mut [f64], vnorm2: f64) {
    let coeff = 2.0 * dot(v, target) / vnorm2;
    for (t, vi) in target.iter_mut().zip(v) {
        *t -= coeff * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert_eq!(m.tr_matvec(&[1.0, 1.0, 1.0]), vec![9.0, 12.0]);
    }

    #[test]
    fn qr_rss_matches_exact_fit() {
        // y lies in the column span: RSS must be ~0.
        let a = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
        ])
        .unwrap();
        let y = [2.0, 3.0, 4.0, 5.0]; // 2 + x
        let (rss, cond) = qr_rss(&a, &y).unwrap();
        assert!(rss.abs() < 1e-12, "rss = {rss}");
        assert!(cond.is_finite());
    }

    #[test]
    fn qr_rss_simple_regression() {
        // Hand-checkable: y on intercept only.
        let a = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let y = [1.0, 2.0, 6.0];
        let (rss, _) = qr_rss(&a, &y).unwrap();
        // mean 3, deviations -2,-1,3 -> 4+1+9 = 14
        assert!((rss - 14.0).abs() < 1e-12);
    }

    #[test]
    fn qr_detects_rank_deficiency() {
        let a = Matrix::from_rows(&[
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
        ])
        .unwrap();
        let (_, cond) = qr_rss(&a, &[1.0, 2.0, 3.0]).unwrap();
        assert!(cond > 1e12);
    }
}
