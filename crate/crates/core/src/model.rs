//! Shared data model: the regression sample, residuals, diagonal
//! scalings and the report every test procedure returns.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// One testing problem: an `n x p` design, a length-`n` response and a
/// hypothesized coefficient vector of length `p`.
///
/// Construction validates dimensions and rejects non-finite entries, so
/// the numeric kernels never have to.
#[derive(Debug, Clone)]
pub struct RegressionSample {
    x: Matrix,
    y: Vec<f64>,
    beta0: Vec<f64>,
}

impl RegressionSample {
    pub fn new(x: Matrix, y: Vec<f64>, beta0: Vec<f64>) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                what: "response length vs design rows",
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if beta0.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                what: "beta0 length vs design columns",
                expected: x.ncols(),
                got: beta0.len(),
            });
        }
        for i in 0..x.nrows() {
            for (j, v) in x.row(i).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { what: "design matrix", row: i, col: j });
                }
            }
        }
        for (i, v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "response", row: i, col: 0 });
            }
        }
        for (j, v) in beta0.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "beta0", row: 0, col: j });
            }
        }
        Ok(RegressionSample { x, y, beta0 })
    }

    /// Convenience constructor with `beta0 = 0`.
    pub fn with_null_beta0(x: Matrix, y: Vec<f64>) -> Result<Self> {
        let p = x.ncols();
        Self::new(x, y, alloc::vec![0.0; p])
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn beta0(&self) -> &[f64] {
        &self.beta0
    }

    /// `delta_i = Y_i - X_i' beta0`.
    pub fn residuals(&self) -> ResidualVector {
        let delta = self
            .y
            .iter()
            .enumerate()
            .map(|(i, &yi)| yi - dot(self.x.row(i), &self.beta0))
            .collect();
        ResidualVector { delta }
    }
}

/// Residuals of the sample against the hypothesized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVector {
    delta: Vec<f64>,
}

impl ResidualVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

/// Diagonal scaling: per-column variances and their reciprocals.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagScaling {
    variances: Vec<f64>,
    inverse: Vec<f64>,
}

impl DiagScaling {
    /// Build from strictly positive variances.
    pub fn from_variances(variances: Vec<f64>) -> Result<Self> {
        for (k, &v) in variances.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::SingularScaling { column: k });
            }
        }
        let inverse = variances.iter().map(|v| 1.0 / v).collect();
        Ok(DiagScaling { variances, inverse })
    }

    /// Unit weights: the identity scaling used by the ZC statistic.
    pub fn unit(p: usize) -> Self {
        DiagScaling {
            variances: alloc::vec![1.0; p],
            inverse: alloc::vec![1.0; p],
        }
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn inverse(&self) -> &[f64] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }
}

/// Which test procedure produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    /// Scale-invariant U-statistic test.
    Sf,
    /// Unstandardized U-statistic test.
    Zc,
    /// Empirical-Bayes score statistic, permutation calibrated.
    Eb,
    /// Classical F-test.
    F,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Sf => "sf",
            Method::Zc => "zc",
            Method::Eb => "eb",
            Method::F => "f",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "sf" | "SF" => Some(Method::Sf),
            "zc" | "ZC" => Some(Method::Zc),
            "eb" | "EB" => Some(Method::Eb),
            "f" | "F" => Some(Method::F),
            _ => None,
        }
    }
}

/// Outcome of one test procedure on one sample.
///
/// `reject` always equals `p_value <= alpha`; for the two U-statistic
/// tests the one-sided p-value is the upper normal tail of `z_value`.
#[derive(Debug, Clone)]
pub struct TestReport {
    pub method: Method,
    pub statistic: f64,
    /// Standardized statistic; `None` for EB and F, where the p-value
    /// is the primary quantity.
    pub z_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    /// Named nuisance estimates that entered the decision.
    pub nuisance: BTreeMap<&'static str, f64>,
}
