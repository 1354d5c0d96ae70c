//! Closed-form asymptotic power: local alternatives for the SF and ZC
//! procedures, the case-(iii) asymptotic relative efficiency, and the
//! two fixed-alternative variances with their power approximations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::special::{normal_cdf, normal_upper_quantile};

/// Population quantities feeding the power formulas.
#[derive(Debug, Clone)]
pub struct PowerInputs {
    /// Covariance matrix, p x p, symmetric with positive diagonal.
    pub sigma: Matrix,
    /// Coefficient discrepancy `beta - beta0`.
    pub delta_beta: Vec<f64>,
    /// Residual variance.
    pub sigma2: f64,
    pub n: usize,
    /// Excess kurtosis of the factor innovations (`E z^4 = 3 + Delta`).
    pub kurtosis_excess: f64,
    /// Factor loading with `Gamma Gamma' = Sigma`; required whenever
    /// `kurtosis_excess != 0`, never synthesized internally.
    pub gamma: Option<Matrix>,
}

impl PowerInputs {
    pub fn validate(&self) -> Result<()> {
        let p = self.sigma.nrows();
        if self.sigma.ncols() != p {
            return Err(Error::DimensionMismatch {
                what: "covariance matrix",
                expected: p,
                got: self.sigma.ncols(),
            });
        }
        let scale = self.sigma.max_abs();
        if !self.sigma.is_symmetric(1e-10 * (1.0 + scale)) {
            return Err(Error::Domain("covariance matrix must be symmetric"));
        }
        for k in 0..p {
            if !(self.sigma[(k, k)] > 0.0) {
                return Err(Error::Domain("covariance diagonal must be strictly positive"));
            }
        }
        if self.delta_beta.len() != p {
            return Err(Error::DimensionMismatch {
                what: "delta_beta length",
                expected: p,
                got: self.delta_beta.len(),
            });
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::Domain("residual variance must be positive"));
        }
        if self.kurtosis_excess < -2.0 {
            return Err(Error::Domain("excess kurtosis must be >= -2"));
        }
        if let Some(gamma) = &self.gamma {
            if gamma.nrows() != p {
                return Err(Error::DimensionMismatch {
                    what: "factor loading rows",
                    expected: p,
                    got: gamma.nrows(),
                });
            }
            // Gamma Gamma' must reproduce Sigma.
            let tol = 1e-8 * scale.max(1.0);
            for i in 0..p {
                for j in i..p {
                    let mut s = 0.0;
                    for k in 0..gamma.ncols() {
                        s += gamma[(i, k)] * gamma[(j, k)];
                    }
                    if (s - self.sigma[(i, j)]).abs() > tol {
                        return Err(Error::Domain(
                            "factor loading does not reproduce the covariance matrix",
                        ));
                    }
                }
            }
        } else if self.kurtosis_excess != 0.0 {
            return Err(Error::Domain(
                "nonzero excess kurtosis requires an explicit factor loading",
            ));
        }
        Ok(())
    }

    fn diag_inv(&self) -> Vec<f64> {
        (0..self.sigma.nrows())
            .map(|k| 1.0 / self.sigma[(k, k)])
            .collect()
    }
}

/// The scalar quadratic forms and traces every power formula consumes.
#[derive(Debug, Clone)]
pub struct PowerQuantities {
    /// `delta' Sigma delta`.
    pub b1: f64,
    /// `delta' Sigma D^{-1} Sigma delta` (the SF noncentrality quadratic).
    pub b2: f64,
    /// `delta' Sigma D^{-1} Sigma D^{-1} Sigma delta`.
    pub b3: f64,
    /// `tr(R^2)` with `R` the correlation matrix.
    pub trace_r2: f64,
    /// `tr(Sigma^2)` (the ZC variance scale).
    pub trace_sigma2: f64,
    /// `|| Sigma delta ||^2` (the ZC noncentrality quadratic).
    pub zc_noncentrality: f64,
    pub kurtosis_excess: f64,
    /// `(tr(A1 o A3), tr(A1 o A2), tr[(A0 diag(A1))^2])`, present iff a
    /// factor loading was supplied.
    pub a_terms: Option<ATerms>,
}

/// Factor-dependent traces entering the fixed-alternative variances.
#[derive(Debug, Clone, Copy)]
pub struct ATerms {
    pub tr_a1_a3: f64,
    pub tr_a1_a2: f64,
    pub tr_a0_diag_a1_sq: f64,
}

/// Evaluates every quadratic form by direct linear algebra.
pub fn power_quantities(inputs: &PowerInputs) -> Result<PowerQuantities> {
    inputs.validate()?;
    let p = inputs.sigma.nrows();
    let d_inv = inputs.diag_inv();

    let u = inputs.sigma.matvec(&inputs.delta_beta); // Sigma delta
    let b1 = dot(&inputs.delta_beta, &u);
    let v: Vec<f64> = u.iter().zip(&d_inv).map(|(ui, di)| ui * di).collect(); // D^{-1} Sigma delta
    let b2 = dot(&u, &v);
    let sv = inputs.sigma.matvec(&v);
    let b3 = dot(&v, &sv);
    let zc_noncentrality = dot(&u, &u);

    let mut trace_r2 = 0.0;
    let mut trace_sigma2 = 0.0;
    for i in 0..p {
        for j in 0..p {
            let s = inputs.sigma[(i, j)];
            trace_sigma2 += s * s;
            trace_r2 += s * s * d_inv[i] * d_inv[j];
        }
    }

    let a_terms = match &inputs.gamma {
        Some(gamma) => {
            let m = gamma.ncols();
            // Column i of Gamma as needed: t = Gamma' delta, u2 = Gamma' v.
            let t = gamma.tr_matvec(&inputs.delta_beta);
            let u2 = gamma.tr_matvec(&v);
            // Correlation matrix applied to each Gamma column.
            let mut tr_a1_a3 = 0.0;
            let mut tr_a1_a2 = 0.0;
            let d_inv_sqrt: Vec<f64> = d_inv.iter().map(|d| libm::sqrt(*d)).collect();
            for col in 0..m {
                // (Gamma' R Gamma)_{col,col} = gd' Sigma gd with
                // gd = D^{-1/2} g, g the column of Gamma.
                let gd: Vec<f64> = (0..p).map(|i| gamma[(i, col)] * d_inv_sqrt[i]).collect();
                let a3 = dot(&gd, &inputs.sigma.matvec(&gd));
                tr_a1_a3 += t[col] * t[col] * a3;
                tr_a1_a2 += t[col] * t[col] * u2[col] * u2[col];
            }
            // tr[(A0 diag(A1))^2] = sum_{ij} (gamma_i' gamma_j)^2 t_i^2 t_j^2.
            let mut tr_a0_diag_a1_sq = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let mut g_ij = 0.0;
                    for r in 0..p {
                        g_ij += gamma[(r, i)] * gamma[(r, j)];
                    }
                    tr_a0_diag_a1_sq += g_ij * g_ij * t[i] * t[i] * t[j] * t[j];
                }
            }
            Some(ATerms {
                tr_a1_a3,
                tr_a1_a2,
                tr_a0_diag_a1_sq,
            })
        }
        None => None,
    };

    Ok(PowerQuantities {
        b1,
        b2,
        b3,
        trace_r2,
        trace_sigma2,
        zc_noncentrality,
        kurtosis_excess: inputs.kurtosis_excess,
        a_terms,
    })
}

/// Local-alternative power of the SF test:
/// `Phi(-z_alpha + n B2 / (sqrt(2 tr(R^2)) sigma^2))`.
pub fn local_power_sf(inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    let q = power_quantities(inputs)?;
    let z_alpha = normal_upper_quantile(alpha)?;
    let shift = inputs.n as f64 * q.b2 / (libm::sqrt(2.0 * q.trace_r2) * inputs.sigma2);
    Ok(normal_cdf(-z_alpha + shift))
}

/// Local-alternative power of the ZC test:
/// `Phi(-z_alpha + n ||Sigma delta||^2 / (sqrt(2 tr(Sigma^2)) sigma^2))`.
pub fn local_power_zc(inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    let q = power_quantities(inputs)?;
    let z_alpha = normal_upper_quantile(alpha)?;
    let shift =
        inputs.n as f64 * q.zc_noncentrality / (libm::sqrt(2.0 * q.trace_sigma2) * inputs.sigma2);
    Ok(normal_cdf(-z_alpha + shift))
}

/// Asymptotic relative efficiency of SF vs ZC in the two-block diagonal
/// case: `sqrt(s1^2 + s2^2) / (sqrt(2) s1)` for variances `s1`, `s2`.
pub fn are_case_iii(sigma1_sq: f64, sigma2_sq: f64) -> Result<f64> {
    if !(sigma1_sq > 0.0 && sigma2_sq > 0.0) {
        return Err(Error::Domain("ARE needs strictly positive variances"));
    }
    Ok(libm::sqrt(sigma1_sq * sigma1_sq + sigma2_sq * sigma2_sq)
        / (libm::sqrt(2.0) * sigma1_sq))
}

fn require_a_terms(q: &PowerQuantities) -> Result<ATerms> {
    match q.a_terms {
        Some(a) => Ok(a),
        None if q.kurtosis_excess == 0.0 => Ok(ATerms {
            tr_a1_a3: 0.0,
            tr_a1_a2: 0.0,
            tr_a0_diag_a1_sq: 0.0,
        }),
        None => Err(Error::Domain(
            "nonzero excess kurtosis requires factor-dependent traces",
        )),
    }
}

/// Variance under the first fixed alternative:
/// `2 sigma^4 tr(R^2) + 2 B1^2 tr(R^2) + 4 sigma^4 tr(R^2) B1
///  + 4 Delta (B1 + sigma^2) tr(A1 o A3) + 2 Delta^2 tr[(A0 diag(A1))^2]`,
/// implemented exactly as printed (see the `power` section of the README
/// for the dimensional caveat on the third term).
pub fn fixed_alt_variance_a1(q: &PowerQuantities, sigma2: f64, trace_r2: f64) -> Result<f64> {
    let a = require_a_terms(q)?;
    let delta = q.kurtosis_excess;
    let s4 = sigma2 * sigma2;
    Ok(2.0 * s4 * trace_r2
        + 2.0 * q.b1 * q.b1 * trace_r2
        + 4.0 * s4 * trace_r2 * q.b1
        + 4.0 * delta * (q.b1 + sigma2) * a.tr_a1_a3
        + 2.0 * delta * delta * a.tr_a0_diag_a1_sq)
}

/// Variance under the second fixed alternative:
/// `(B1 + sigma^2) B3 + B2^2 + Delta tr(A1 o A2)`.
pub fn fixed_alt_variance_a2(q: &PowerQuantities, sigma2: f64) -> Result<f64> {
    let a = require_a_terms(q)?;
    Ok((q.b1 + sigma2) * q.b3 + q.b2 * q.b2 + q.kurtosis_excess * a.tr_a1_a2)
}

/// Which fixed-alternative regime a power approximation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedAlternative {
    A1,
    A2,
}

/// Power approximation under a fixed alternative.
///
/// A1: `Phi(-sqrt(2 tr(R^2)) sigma^2 z_alpha / sigma_A1 + n B2 / sigma_A1)`.
/// A2: same with the first term divided by `sqrt(n - 1) sigma_A2`.
pub fn fixed_alt_power(which: FixedAlternative, inputs: &PowerInputs, alpha: f64) -> Result<f64> {
    let q = power_quantities(inputs)?;
    let z_alpha = normal_upper_quantile(alpha)?;
    let noncentral = inputs.n as f64 * q.b2;
    let threshold = libm::sqrt(2.0 * q.trace_r2) * inputs.sigma2 * z_alpha;
    match which {
        FixedAlternative::A1 => {
            let var = fixed_alt_variance_a1(&q, inputs.sigma2, q.trace_r2)?;
            if !(var > 0.0) {
                return Err(Error::Domain("fixed-alternative variance is not positive"));
            }
            let sd = libm::sqrt(var);
            Ok(normal_cdf(-threshold / sd + noncentral / sd))
        }
        FixedAlternative::A2 => {
            let var = fixed_alt_variance_a2(&q, inputs.sigma2)?;
            if !(var > 0.0) {
                return Err(Error::Domain("fixed-alternative variance is not positive"));
            }
            let sd = libm::sqrt(var);
            let nm1 = libm::sqrt((inputs.n as f64) - 1.0);
            Ok(normal_cdf(-threshold / (nm1 * sd) + noncentral / sd))
        }
    }
}
