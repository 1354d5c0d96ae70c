//! Scale-invariant simultaneous tests for high-dimensional regression
//! coefficients.
//!
//! Given `n` observations of a `p`-dimensional design (possibly with
//! `p >> n`) and a hypothesized coefficient vector `beta0`, this crate
//! computes four test procedures for `H0: beta = beta0`:
//!
//! - `SF`: a scale-invariant fourth-order U-statistic that standardizes
//!   each covariate by its sample variance, so the decision does not
//!   depend on the measurement units of individual columns;
//! - `ZC`: the unstandardized analog of the same U-statistic;
//! - `EB`: an empirical-Bayes style score statistic, calibrated here by
//!   permutation of the centered residuals;
//! - `F`: the classical F-test, applicable only when `p <= n - 2`.
//!
//! The crate also ships closed-form asymptotic power calculators for the
//! SF and ZC procedures (local and fixed alternatives) and a deterministic
//! Monte Carlo harness built around a moving-average design generator,
//! used to measure empirical size and power on synthetic grids.
//!
//! The library is `no_std` + `alloc`; all IO, CSV ingestion, grid files
//! and parallel execution live in the companion `sireg-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod kahan;
pub mod linalg;
pub mod model;
pub mod power;
pub mod sim;
pub mod special;
pub mod testing;
pub mod ustat;

pub use error::{Error, Result};
pub use model::{DiagScaling, Method, RegressionSample, ResidualVector, TestReport};
pub use testing::TestConfig;
