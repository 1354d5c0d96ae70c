//! Deterministic synthetic-data generators and the Monte Carlo runner.
//!
//! Each replication draws its own ChaCha stream keyed by
//! `(master_seed, replication index, purpose)`, so replications can run
//! in any order or in parallel and still produce bit-identical results.
//! The moving-average coefficients and column means are drawn once per
//! cell and held fixed across replications.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::RegressionSample;
use crate::testing::{eb_test, sf_test, zc_test, TestConfig};

/// Which innovation law feeds the moving-average design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// All innovations standard normal: equal column variances.
    I,
    /// First half of the innovation sequence standard normal, second
    /// half centered Gamma(4, 1): unequal column variances.
    II,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::I => "I",
            Scenario::II => "II",
        }
    }
}

/// Residual law for the response. Both branches have variance 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualLaw {
    /// `N(0, 4)`.
    Normal4,
    /// Centered Gamma with shape 1 and rate 0.5 (scale 2).
    CenteredGamma,
}

impl ResidualLaw {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResidualLaw::Normal4 => "normal4",
            ResidualLaw::CenteredGamma => "gamma",
        }
    }
}

/// Shape of the alternative coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    Null,
    /// First half of the components nonzero, equal magnitude.
    Nonsparse,
    /// First five components nonzero, equal magnitude.
    Sparse5,
}

impl Alternative {
    pub fn as_str(&self) -> &'static str {
        match self {
            Alternative::Null => "null",
            Alternative::Nonsparse => "nonsparse",
            Alternative::Sparse5 => "sparse5",
        }
    }
}

/// Full recipe for one simulation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub n: usize,
    pub p: usize,
    /// Moving-average order; must satisfy `ma_order < p`.
    pub ma_order: usize,
    pub scenario: Scenario,
    pub residual: ResidualLaw,
    pub alternative: Alternative,
    /// Target squared norm of the coefficient vector.
    pub beta_norm_sq: f64,
    pub master_seed: u64,
    pub replications: usize,
    pub alpha: f64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.ma_order == 0 {
            return Err(Error::Domain("n, p and the MA order must be positive"));
        }
        if self.ma_order >= self.p {
            return Err(Error::Domain("the MA order must be smaller than p"));
        }
        if self.replications == 0 {
            return Err(Error::Domain("replications must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain("alpha must lie strictly in (0, 1)"));
        }
        if self.beta_norm_sq < 0.0 {
            return Err(Error::Domain("beta_norm_sq must be nonnegative"));
        }
        let is_null = self.alternative == Alternative::Null;
        if is_null != (self.beta_norm_sq == 0.0) {
            return Err(Error::Domain(
                "the null alternative must have beta_norm_sq = 0 and vice versa",
            ));
        }
        if self.alternative == Alternative::Sparse5 && self.p < 5 {
            return Err(Error::Domain("the sparse alternative needs p >= 5"));
        }
        Ok(())
    }
}

/// Empirical rejection rate of one method in one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionRate {
    pub rate: f64,
    pub replications: usize,
}

impl RejectionRate {
    /// Binomial Monte Carlo standard error `sqrt(r (1 - r) / reps)`.
    pub fn mc_standard_error(&self) -> f64 {
        libm::sqrt(self.rate * (1.0 - self.rate) / self.replications as f64)
    }
}

/// Result of one simulated cell.
#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub sf: RejectionRate,
    pub zc: RejectionRate,
    pub eb: RejectionRate,
    pub config: GeneratorConfig,
    pub rho: Vec<f64>,
    pub mu: Vec<f64>,
    /// Replications skipped because a test errored (expected never
    /// under these generators).
    pub failures: usize,
}

/// Rejection decisions of one replication.
#[derive(Debug, Clone, Copy)]
pub struct ReplicationOutcome {
    pub sf: bool,
    pub zc: bool,
    pub eb: bool,
}

// Purpose tags for the per-replication streams.
const PURPOSE_CONSTANTS: u64 = 0x636f6e7374; // "const"
const PURPOSE_DESIGN: u64 = 0x64736e; // "dsn"
const PURPOSE_RESPONSE: u64 = 0x727370; // "rsp"
const PURPOSE_EB: u64 = 0x6562; // "eb"

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Counter-style stream derivation: mixes the seed components through
/// splitmix64 and keys an independent ChaCha8 stream.
fn stream(master_seed: u64, replication: u64, purpose: u64) -> ChaCha8Rng {
    let mixed = splitmix64(splitmix64(splitmix64(master_seed) ^ replication) ^ purpose);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Draws the cell constants: MA coefficients `rho ~ U(0,1)^T` and
/// column means `mu ~ U(2,3)^p`. Both depend only on the master seed.
pub fn draw_experiment_constants(cfg: &GeneratorConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    let mut rng = stream(cfg.master_seed, 0, PURPOSE_CONSTANTS);
    let rho: Vec<f64> = (0..cfg.ma_order).map(|_| rng.random_range(0.0..1.0)).collect();
    let mu: Vec<f64> = (0..cfg.p).map(|_| rng.random_range(2.0..3.0)).collect();
    Ok((rho, mu))
}

fn draw_innovation(rng: &mut ChaCha8Rng, gamma4: &Gamma<f64>, is_gamma: bool) -> f64 {
    if is_gamma {
        gamma4.sample(rng) - 4.0
    } else {
        StandardNormal.sample(rng)
    }
}

/// Generates one `n x p` design from the moving-average model
/// `X_ij = sum_l rho_l Z_{i, j+l-1} + mu_j`.
pub fn gen_design(
    cfg: &GeneratorConfig,
    rho: &[f64],
    mu: &[f64],
    replication: usize,
) -> Matrix {
    let n = cfg.n;
    let p = cfg.p;
    let t = cfg.ma_order;
    let span = p + t - 1;
    let split = span / 2;
    let mut rng = stream(cfg.master_seed, replication as u64, PURPOSE_DESIGN);
    // Gamma(4, 1): shape 4, scale 1, mean 4, variance 4.
    let gamma4 = Gamma::new(4.0, 1.0).expect("valid gamma parameters");

    let mut data = Vec::with_capacity(n * p);
    let mut z = vec![0.0; span];
    for _ in 0..n {
        for (j, slot) in z.iter_mut().enumerate() {
            let is_gamma = cfg.scenario == Scenario::II && j >= split;
            *slot = draw_innovation(&mut rng, &gamma4, is_gamma);
        }
        for j in 0..p {
            let mut s = 0.0;
            for (l, r) in rho.iter().enumerate() {
                s += r * z[j + l];
            }
            data.push(s + mu[j]);
        }
    }
    Matrix::from_vec(n, p, data).expect("generator produced a consistent shape")
}

/// Coefficient vector under the configured alternative, with
/// `||beta||^2 = beta_norm_sq` exactly.
pub fn gen_beta(cfg: &GeneratorConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut beta = vec![0.0; cfg.p];
    match cfg.alternative {
        Alternative::Null => {}
        Alternative::Nonsparse => {
            let k = cfg.p / 2;
            let v = libm::sqrt(cfg.beta_norm_sq / k as f64);
            for slot in beta.iter_mut().take(k) {
                *slot = v;
            }
        }
        Alternative::Sparse5 => {
            let v = libm::sqrt(cfg.beta_norm_sq / 5.0);
            for slot in beta.iter_mut().take(5) {
                *slot = v;
            }
        }
    }
    Ok(beta)
}

/// Response `Y_i = X_i' beta + eps_i` with the configured residual law.
pub fn gen_response(
    x: &Matrix,
    beta: &[f64],
    cfg: &GeneratorConfig,
    replication: usize,
) -> Vec<f64> {
    let mut rng = stream(cfg.master_seed, replication as u64, PURPOSE_RESPONSE);
    // Gamma(1, rate 0.5) = shape 1, scale 2: mean 2, variance 4.
    let gamma_resid = Gamma::new(1.0, 2.0).expect("valid gamma parameters");
    (0..x.nrows())
        .map(|i| {
            let eps = match cfg.residual {
                ResidualLaw::Normal4 => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    2.0 * z
                }
                ResidualLaw::CenteredGamma => gamma_resid.sample(&mut rng) - 2.0,
            };
            crate::linalg::dot(x.row(i), beta) + eps
        })
        .collect()
}

/// Runs one replication: regenerate `(X, Y)`, test `beta0 = 0` with all
/// three high-dimensional procedures.
pub fn run_replication(
    cfg: &GeneratorConfig,
    rho: &[f64],
    mu: &[f64],
    replication: usize,
) -> Result<ReplicationOutcome> {
    let x = gen_design(cfg, rho, mu, replication);
    let beta = gen_beta(cfg)?;
    let y = gen_response(&x, &beta, cfg, replication);
    let sample = RegressionSample::with_null_beta0(x, y)?;
    let mut eb_seed_rng = stream(cfg.master_seed, replication as u64, PURPOSE_EB);
    let test_cfg = TestConfig {
        alpha: cfg.alpha,
        eb_permutations: 200,
        rng_seed: eb_seed_rng.random(),
    };
    Ok(ReplicationOutcome {
        sf: sf_test(&sample, &test_cfg)?.reject,
        zc: zc_test(&sample, &test_cfg)?.reject,
        eb: eb_test(&sample, &test_cfg)?.reject,
    })
}

/// Folds per-replication outcomes into a cell result. Callers that run
/// replications in parallel collect outcomes in replication order and
/// feed them here, which keeps parallel and serial execution identical.
pub fn summarize(
    cfg: &GeneratorConfig,
    rho: Vec<f64>,
    mu: Vec<f64>,
    outcomes: &[Result<ReplicationOutcome>],
) -> MonteCarloResult {
    let mut counts = [0usize; 3];
    let mut failures = 0usize;
    let mut completed = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                completed += 1;
                counts[0] += o.sf as usize;
                counts[1] += o.zc as usize;
                counts[2] += o.eb as usize;
            }
            Err(_) => failures += 1,
        }
    }
    let denom = completed.max(1);
    let rate = |c: usize| RejectionRate {
        rate: c as f64 / denom as f64,
        replications: completed,
    };
    MonteCarloResult {
        sf: rate(counts[0]),
        zc: rate(counts[1]),
        eb: rate(counts[2]),
        config: cfg.clone(),
        rho,
        mu,
        failures,
    }
}

/// Serial Monte Carlo over one cell.
pub fn run_cell(cfg: &GeneratorConfig) -> Result<MonteCarloResult> {
    cfg.validate()?;
    let (rho, mu) = draw_experiment_constants(cfg)?;
    let outcomes: Vec<Result<ReplicationOutcome>> = (0..cfg.replications)
        .map(|rep| run_replication(cfg, &rho, &mu, rep))
        .collect();
    Ok(summarize(cfg, rho, mu, &outcomes))
}

/// Serial Monte Carlo over a grid of cells. Per-cell errors are
/// reported per cell; the grid keeps going.
pub fn run_grid(grid: &[GeneratorConfig]) -> Result<Vec<Result<MonteCarloResult>>> {
    if grid.is_empty() {
        return Err(Error::Domain("the simulation grid is empty"));
    }
    Ok(grid.iter().map(run_cell).collect())
}
