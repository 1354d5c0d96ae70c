//! The four test procedures. Each maps a sample and a configuration to
//! a [`TestReport`] whose decision is always `p_value <= alpha`.

use alloc::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{diag_sample_variances, trace_estimates};
use crate::linalg::{dot, qr_rss, Matrix};
use crate::model::{DiagScaling, Method, RegressionSample, TestReport};
use crate::special::{f_upper_tail, normal_sf};
use crate::ustat::{tn_core_from_gram, GramMatrix};

/// Per-run configuration shared by all procedures.
#[derive(Debug, Clone)]
pub struct TestConfig {
    pub alpha: f64,
    /// Permutation draws for the EB calibration.
    pub eb_permutations: usize,
    /// Seed for the EB permutation stream; the other procedures are
    /// deterministic.
    pub rng_seed: u64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: 0.05,
            eb_permutations: 200,
            rng_seed: 0,
        }
    }
}

impl TestConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain("alpha must lie strictly in (0, 1)"));
        }
        if self.eb_permutations == 0 {
            return Err(Error::Domain("eb_permutations must be positive"));
        }
        Ok(())
    }
}

/// Shared body of the two U-statistic tests: statistic from the fast
/// path, one-sided normal calibration `z = n T / (sigma2 * sqrt(2 tr))`.
fn u_statistic_test(
    sample: &RegressionSample,
    cfg: &TestConfig,
    method: Method,
) -> Result<TestReport> {
    cfg.validate()?;
    let n = sample.n();
    if n < 5 {
        return Err(Error::SampleTooSmall { required: 5, got: n });
    }
    let d_s = diag_sample_variances(sample.x())?;
    let est = trace_estimates(sample, &d_s)?;
    let delta = sample.residuals();

    let weights = match method {
        Method::Sf => d_s.clone(),
        Method::Zc => DiagScaling::unit(sample.p()),
        _ => unreachable!("u_statistic_test only serves SF and ZC"),
    };
    let gram = GramMatrix::build(sample.x(), &weights)?;
    let statistic = tn_core_from_gram(&gram, delta.as_slice());
    let trace = match method {
        Method::Sf => est.trace_r2_hat,
        _ => est.trace_s2_hat,
    };

    let numer = n as f64 * statistic;
    let denom = est.sigma2_hat * libm::sqrt(2.0 * trace);
    let z_value = if numer == 0.0 && denom == 0.0 {
        0.0
    } else {
        numer / denom
    };
    let p_value = normal_sf(z_value);

    let mut nuisance = BTreeMap::new();
    nuisance.insert("sigma2_hat", est.sigma2_hat);
    nuisance.insert("trace_r2_hat", est.trace_r2_hat);
    nuisance.insert("trace_s2_hat", est.trace_s2_hat);
    nuisance.insert("trace_clamped", if est.clamped { 1.0 } else { 0.0 });

    Ok(TestReport {
        method,
        statistic,
        z_value: Some(z_value),
        p_value,
        reject: p_value <= cfg.alpha,
        alpha: cfg.alpha,
        nuisance,
    })
}

/// Scale-invariant U-statistic test.
pub fn sf_test(sample: &RegressionSample, cfg: &TestConfig) -> Result<TestReport> {
    u_statistic_test(sample, cfg, Method::Sf)
}

/// Unstandardized U-statistic test.
pub fn zc_test(sample: &RegressionSample, cfg: &TestConfig) -> Result<TestReport> {
    u_statistic_test(sample, cfg, Method::Zc)
}

/// Empirical-Bayes score statistic with permutation calibration.
///
/// `G = ||X'(Y - mean(Y) - X beta0)||^2 / (n ||Y - mean(Y) - X beta0||^2)`;
/// the p-value counts permutations of the centered residual vector whose
/// statistic reaches the observed one, with the `(1 + k) / (1 + B)`
/// convention.
pub fn eb_test(sample: &RegressionSample, cfg: &TestConfig) -> Result<TestReport> {
    cfg.validate()?;
    let n = sample.n();
    if n < 3 {
        return Err(Error::SampleTooSmall { required: 3, got: n });
    }
    let x = sample.x();
    let y = sample.y();
    let alpha_hat = y.iter().sum::<f64>() / n as f64;
    let v: alloc::vec::Vec<f64> = (0..n)
        .map(|i| y[i] - alpha_hat - dot(x.row(i), sample.beta0()))
        .collect();
    let vnorm2: f64 = v.iter().map(|e| e * e).sum();
    if vnorm2 == 0.0 {
        return Err(Error::DegenerateInput(
            "residual vector is identically zero; the EB statistic is undefined",
        ));
    }

    let numerator = |vec: &[f64]| -> f64 {
        let xv = x.tr_matvec(vec);
        xv.iter().map(|e| e * e).sum::<f64>()
    };
    let observed_num = numerator(&v);
    let statistic = observed_num / (n as f64 * vnorm2);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut permuted = v.clone();
    let mut exceed = 0usize;
    for _ in 0..cfg.eb_permutations {
        permuted.shuffle(&mut rng);
        // The denominator is permutation invariant, so compare numerators.
        if numerator(&permuted) >= observed_num {
            exceed += 1;
        }
    }
    let p_value = (1.0 + exceed as f64) / (1.0 + cfg.eb_permutations as f64);

    Ok(TestReport {
        method: Method::Eb,
        statistic,
        z_value: None,
        p_value,
        reject: p_value <= cfg.alpha,
        alpha: cfg.alpha,
        nuisance: BTreeMap::new(),
    })
}

/// Classical F-test for `H0: beta = beta0` in the model with intercept,
/// computed in the residual-sum-of-squares form on `Y - X beta0`.
///
/// Requires `p <= n - 2`; a near-singular design (triangular-factor
/// condition estimate above 1e12) is reported as not applicable.
pub fn f_test(sample: &RegressionSample, cfg: &TestConfig) -> Result<TestReport> {
    cfg.validate()?;
    let n = sample.n();
    let p = sample.p();
    if p + 2 > n {
        return Err(Error::NotApplicable(
            "F-test needs p <= n - 2 (within-sample degrees of freedom exhausted)",
        ));
    }
    // Shifted response: testing beta = beta0 in Y is testing beta = 0
    // in W = Y - X beta0.
    let w: alloc::vec::Vec<f64> = sample.residuals().as_slice().to_vec();

    // Null model: intercept only.
    let w_bar = w.iter().sum::<f64>() / n as f64;
    let rss0: f64 = w.iter().map(|v| (v - w_bar) * (v - w_bar)).sum();

    // Full model: intercept plus all covariates.
    let mut design = Matrix::zeros(n, p + 1);
    for i in 0..n {
        design[(i, 0)] = 1.0;
        for (j, v) in sample.x().row(i).iter().enumerate() {
            design[(i, j + 1)] = *v;
        }
    }
    let (rss1, cond) = qr_rss(&design, &w)?;
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::NotApplicable("design matrix is numerically singular"));
    }

    let df2 = (n - p - 1) as f64;
    let explained = (rss0 - rss1).max(0.0);
    let statistic = (explained / p as f64) / (rss1 / df2);
    let p_value = f_upper_tail(statistic, p as f64, df2)?;

    let mut nuisance = BTreeMap::new();
    nuisance.insert("rss_null", rss0);
    nuisance.insert("rss_full", rss1);

    Ok(TestReport {
        method: Method::F,
        statistic,
        z_value: None,
        p_value,
        reject: p_value <= cfg.alpha,
        alpha: cfg.alpha,
        nuisance,
    })
}

/// Runs one procedure by name.
pub fn run_method(
    method: Method,
    sample: &RegressionSample,
    cfg: &TestConfig,
) -> Result<TestReport> {
    match method {
        Method::Sf => sf_test(sample, cfg),
        Method::Zc => zc_test(sample, cfg),
        Method::Eb => eb_test(sample, cfg),
        Method::F => f_test(sample, cfg),
    }
}
