//! `sireg simulate`: run Monte Carlo grids, in parallel over
//! replications, with bit-identical output on any thread count.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Deserialize;

use sireg_core::sim::{
    self, Alternative, GeneratorConfig, MonteCarloResult, ResidualLaw, Scenario,
};

use crate::failure::{CliResult, Failure};
use crate::io::{self, OutputFormat};

pub struct SimulateArgs {
    /// Path to a TOML grid file, or the builtin name `paper-tables`.
    pub grid: String,
    pub threads: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

/// One `[[cell]]` entry of a grid file. Field names map 1:1 onto
/// `GeneratorConfig`; `seed` defaults to a value derived from the
/// `--seed` flag and the cell position.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellSpec {
    n: usize,
    p: usize,
    t: usize,
    scenario: String,
    residual: String,
    alternative: String,
    #[serde(default)]
    beta_norm_sq: f64,
    #[serde(default)]
    replications: Option<usize>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    #[serde(rename = "cell")]
    cells: Vec<CellSpec>,
}

fn parse_scenario(s: &str) -> Option<Scenario> {
    match s {
        "I" | "i" | "1" => Some(Scenario::I),
        "II" | "ii" | "2" => Some(Scenario::II),
        _ => None,
    }
}

fn parse_residual(s: &str) -> Option<ResidualLaw> {
    match s {
        "normal4" | "normal" => Some(ResidualLaw::Normal4),
        "gamma" | "centered-gamma" => Some(ResidualLaw::CenteredGamma),
        _ => None,
    }
}

fn parse_alternative(s: &str) -> Option<Alternative> {
    match s {
        "null" => Some(Alternative::Null),
        "nonsparse" => Some(Alternative::Nonsparse),
        "sparse5" | "sparse" => Some(Alternative::Sparse5),
        _ => None,
    }
}

fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z ^ (z >> 31)
}

fn cell_config(spec: &CellSpec, index: usize, base_seed: u64) -> CliResult<GeneratorConfig> {
    let named = |what: &str| {
        Failure::validation(format!("grid cell {}: invalid {what}", index + 1))
    };
    let cfg = GeneratorConfig {
        n: spec.n,
        p: spec.p,
        ma_order: spec.t,
        scenario: parse_scenario(&spec.scenario)
            .ok_or_else(|| named("scenario (expected \"I\" or \"II\")"))?,
        residual: parse_residual(&spec.residual)
            .ok_or_else(|| named("residual (expected \"normal4\" or \"gamma\")"))?,
        alternative: parse_alternative(&spec.alternative)
            .ok_or_else(|| named("alternative (expected \"null\", \"nonsparse\" or \"sparse5\")"))?,
        beta_norm_sq: spec.beta_norm_sq,
        master_seed: spec.seed.unwrap_or_else(|| mix_seed(base_seed, index as u64)),
        replications: spec.replications.unwrap_or(1000),
        alpha: spec.alpha.unwrap_or(0.05),
    };
    cfg.validate()
        .map_err(|e| Failure::validation(format!("grid cell {}: {e}", index + 1)))?;
    Ok(cfg)
}

/// The simulation study grid shipped with the binary: both residual
/// laws, both scenarios, two moving-average orders, three (n, p)
/// shapes, and the null plus both alternative shapes at three
/// coefficient-norm levels.
fn builtin_paper_grid(base_seed: u64) -> Vec<GeneratorConfig> {
    let mut grid = Vec::new();
    let mut index = 0u64;
    for residual in [ResidualLaw::Normal4, ResidualLaw::CenteredGamma] {
        for scenario in [Scenario::I, Scenario::II] {
            for t in [10usize, 20] {
                for (n, p) in [(30usize, 100usize), (40, 200), (50, 400)] {
                    let mut alts = vec![(Alternative::Null, 0.0)];
                    for alt in [Alternative::Nonsparse, Alternative::Sparse5] {
                        for level in [0.03, 0.06, 0.09] {
                            alts.push((alt, level));
                        }
                    }
                    for (alternative, beta_norm_sq) in alts {
                        grid.push(GeneratorConfig {
                            n,
                            p,
                            ma_order: t,
                            scenario,
                            residual,
                            alternative,
                            beta_norm_sq,
                            master_seed: mix_seed(base_seed, index),
                            replications: 1000,
                            alpha: 0.05,
                        });
                        index += 1;
                    }
                }
            }
        }
    }
    grid
}

fn load_grid(args: &SimulateArgs) -> CliResult<Vec<GeneratorConfig>> {
    if args.grid == "paper-tables" {
        return Ok(builtin_paper_grid(args.seed));
    }
    let path = PathBuf::from(&args.grid);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
    let parsed: GridFile = toml::from_str(&text)
        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    if parsed.cells.is_empty() {
        return Err(Failure::validation(format!(
            "{}: grid has no [[cell]] entries",
            path.display()
        )));
    }
    parsed
        .cells
        .iter()
        .enumerate()
        .map(|(i, spec)| cell_config(spec, i, args.seed))
        .collect()
}

/// Runs one cell with replications fanned out over the rayon pool.
/// Collection preserves replication order, so the summary is identical
/// to the serial `sim::run_cell`.
fn run_cell_parallel(cfg: &GeneratorConfig) -> CliResult<MonteCarloResult> {
    let (rho, mu) = sim::draw_experiment_constants(cfg)?;
    let outcomes: Vec<sireg_core::Result<sim::ReplicationOutcome>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| sim::run_replication(cfg, &rho, &mu, rep))
        .collect();
    Ok(sim::summarize(cfg, rho, mu, &outcomes))
}

const HEADER: [&str; 14] = [
    "scenario",
    "residual",
    "t",
    "n",
    "p",
    "alternative",
    "beta_norm_sq",
    "replications",
    "alpha",
    "seed",
    "method",
    "rejection_rate",
    "mc_standard_error",
    "failures",
];

fn result_rows(result: &MonteCarloResult) -> Vec<Vec<String>> {
    let cfg = &result.config;
    let rates = [("sf", result.sf), ("zc", result.zc), ("eb", result.eb)];
    rates
        .iter()
        .map(|(method, rate)| {
            vec![
                cfg.scenario.as_str().to_string(),
                cfg.residual.as_str().to_string(),
                cfg.ma_order.to_string(),
                cfg.n.to_string(),
                cfg.p.to_string(),
                cfg.alternative.as_str().to_string(),
                io::fmt_f64(cfg.beta_norm_sq),
                cfg.replications.to_string(),
                io::fmt_f64(cfg.alpha),
                cfg.master_seed.to_string(),
                method.to_string(),
                io::fmt_f64(rate.rate),
                io::fmt_f64(rate.mc_standard_error()),
                result.failures.to_string(),
            ]
        })
        .collect()
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let grid = load_grid(args)?;

    let pool = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Failure::validation(format!("--threads: {e}")))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| Failure::runtime(format!("thread pool: {e}")))?,
    };

    let total = grid.len();
    let mut rows = Vec::with_capacity(total * 3);
    for (i, cfg) in grid.iter().enumerate() {
        eprintln!(
            "cell {}/{}: scenario {} {} T={} (n,p)=({},{}) {} ||beta||^2={}",
            i + 1,
            total,
            cfg.scenario.as_str(),
            cfg.residual.as_str(),
            cfg.ma_order,
            cfg.n,
            cfg.p,
            cfg.alternative.as_str(),
            cfg.beta_norm_sq
        );
        let result = pool.install(|| run_cell_parallel(cfg))?;
        if result.failures > 0 {
            eprintln!(
                "warning: cell {}: {} replication(s) failed and were excluded",
                i + 1,
                result.failures
            );
        }
        rows.extend(result_rows(&result));
    }

    let mut sink = io::open_sink(args.out.as_deref())?;
    args.format.write(sink.as_mut(), &HEADER, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_grid_has_full_inventory() {
        // 2 residuals x 2 scenarios x 2 orders x 3 shapes x 7
        // alternative rows = 168 cells.
        let grid = builtin_paper_grid(0);
        assert_eq!(grid.len(), 168);
        for cfg in &grid {
            cfg.validate().unwrap();
        }
        // Seeds are distinct across cells.
        let mut seeds: Vec<u64> = grid.iter().map(|c| c.master_seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 168);
    }

    #[test]
    fn grid_file_round_trip() {
        let text = r#"
            [[cell]]
            n = 30
            p = 100
            t = 10
            scenario = "I"
            residual = "normal4"
            alternative = "null"

            [[cell]]
            n = 40
            p = 200
            t = 20
            scenario = "II"
            residual = "gamma"
            alternative = "sparse5"
            beta_norm_sq = 0.06
            replications = 50
            alpha = 0.1
            seed = 7
        "#;
        let parsed: GridFile = toml::from_str(text).unwrap();
        let cfgs: Vec<GeneratorConfig> = parsed
            .cells
            .iter()
            .enumerate()
            .map(|(i, s)| cell_config(s, i, 3).unwrap())
            .collect();
        assert_eq!(cfgs[0].replications, 1000);
        assert_eq!(cfgs[0].alpha, 0.05);
        assert_eq!(cfgs[1].master_seed, 7);
        assert_eq!(cfgs[1].alternative, Alternative::Sparse5);
        assert_eq!(cfgs[1].residual, ResidualLaw::CenteredGamma);
    }

    #[test]
    fn invalid_cell_is_named() {
        let text = r#"
            [[cell]]
            n = 30
            p = 100
            t = 10
            scenario = "III"
            residual = "normal4"
            alternative = "null"
        "#;
        let parsed: GridFile = toml::from_str(text).unwrap();
        let err = cell_config(&parsed.cells[0], 0, 0).unwrap_err();
        assert!(err.to_string().contains("grid cell 1"));
    }

    #[test]
    fn parallel_cell_matches_serial() {
        let cfg = GeneratorConfig {
            n: 20,
            p: 30,
            ma_order: 5,
            scenario: Scenario::I,
            residual: ResidualLaw::Normal4,
            alternative: Alternative::Null,
            beta_norm_sq: 0.0,
            master_seed: 11,
            replications: 8,
            alpha: 0.05,
        };
        let serial = sim::run_cell(&cfg).unwrap();
        let parallel = run_cell_parallel(&cfg).unwrap();
        assert_eq!(serial.sf.rate, parallel.sf.rate);
        assert_eq!(serial.zc.rate, parallel.zc.rate);
        assert_eq!(serial.eb.rate, parallel.eb.rate);
    }
}
