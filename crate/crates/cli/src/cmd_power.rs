//! `sireg power`: evaluate the asymptotic power formulas from a TOML
//! specification file.

use std::path::PathBuf;

use serde::Deserialize;

use sireg_core::linalg::Matrix;
use sireg_core::power::{
    are_case_iii, fixed_alt_power, local_power_sf, local_power_zc, FixedAlternative, PowerInputs,
};

use crate::failure::{CliResult, Failure};
use crate::io::{self, OutputFormat};

pub struct PowerArgs {
    pub spec: PathBuf,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// TOML power specification. `sigma` is a dense row-major matrix;
/// `sigma_diag` is shorthand for a diagonal covariance. Exactly one of
/// the two must be present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerSpec {
    #[serde(default)]
    sigma: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    sigma_diag: Option<Vec<f64>>,
    delta_beta: Vec<f64>,
    sigma2: f64,
    n: usize,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    kurtosis_excess: Option<f64>,
    #[serde(default)]
    gamma: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    are: Option<AreSpec>,
    /// Fixed-alternative regimes to evaluate: any of "a1", "a2".
    #[serde(default)]
    fixed_alternatives: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AreSpec {
    sigma1_sq: f64,
    sigma2_sq: f64,
}

fn dense(rows: &[Vec<f64>], what: &str) -> CliResult<Matrix> {
    Matrix::from_rows(rows)
        .map_err(|e| Failure::validation(format!("power spec: {what}: {e}")))
}

fn build_inputs(spec: &PowerSpec) -> CliResult<PowerInputs> {
    let sigma = match (&spec.sigma, &spec.sigma_diag) {
        (Some(rows), None) => dense(rows, "sigma")?,
        (None, Some(diag)) => {
            let p = diag.len();
            let mut m = Matrix::zeros(p, p);
            for (k, v) in diag.iter().enumerate() {
                m[(k, k)] = *v;
            }
            m
        }
        _ => {
            return Err(Failure::validation(
                "power spec: provide exactly one of `sigma` and `sigma_diag`",
            ))
        }
    };
    let gamma = match &spec.gamma {
        Some(rows) => Some(dense(rows, "gamma")?),
        None => None,
    };
    Ok(PowerInputs {
        sigma,
        delta_beta: spec.delta_beta.clone(),
        sigma2: spec.sigma2,
        n: spec.n,
        kurtosis_excess: spec.kurtosis_excess.unwrap_or(0.0),
        gamma,
    })
}

pub fn run(args: &PowerArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: PowerSpec = toml::from_str(&text)
        .map_err(|e| Failure::validation(format!("{}: {e}", args.spec.display())))?;
    let alpha = spec.alpha.unwrap_or(0.05);
    let inputs = build_inputs(&spec)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |quantity: &str, value: f64| {
        rows.push(vec![quantity.to_string(), io::fmt_f64(value)]);
    };
    push("local_power_sf", local_power_sf(&inputs, alpha)?);
    push("local_power_zc", local_power_zc(&inputs, alpha)?);
    if let Some(are) = &spec.are {
        push("are_case_iii", are_case_iii(are.sigma1_sq, are.sigma2_sq)?);
    }
    for name in &spec.fixed_alternatives {
        let which = match name.as_str() {
            "a1" | "A1" => FixedAlternative::A1,
            "a2" | "A2" => FixedAlternative::A2,
            other => {
                return Err(Failure::validation(format!(
                    "power spec: unknown fixed alternative {other:?} (expected \"a1\" or \"a2\")"
                )))
            }
        };
        let value = fixed_alt_power(which, &inputs, alpha)?;
        match which {
            FixedAlternative::A1 => push("fixed_power_a1", value),
            FixedAlternative::A2 => push("fixed_power_a2", value),
        }
    }

    let mut sink = io::open_sink(args.out.as_deref())?;
    args.format.write(sink.as_mut(), &["quantity", "value"], &rows)
}
