//! `sireg`: scale-invariant simultaneous tests for high-dimensional
//! regression coefficients, with a Monte Carlo harness and asymptotic
//! power calculators.

mod cmd_power;
mod cmd_simulate;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sireg_core::model::Method;

use crate::failure::{CliResult, Failure};
use crate::io::OutputFormat;

#[derive(Parser)]
#[command(
    name = "sireg",
    version,
    about = "Scale-invariant tests for high-dimensional regression coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatFlag {
    Csv,
    Table,
}

impl From<FormatFlag> for OutputFormat {
    fn from(f: FormatFlag) -> Self {
        match f {
            FormatFlag::Csv => OutputFormat::Csv,
            FormatFlag::Table => OutputFormat::Table,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run hypothesis tests on CSV data.
    Test(TestFlags),
    /// Run a Monte Carlo simulation grid.
    Simulate(SimulateFlags),
    /// Evaluate asymptotic power formulas from a spec file.
    Power(PowerFlags),
}

#[derive(Args)]
struct TestFlags {
    /// Design matrix CSV, one observation per row (optional header).
    #[arg(long)]
    x: PathBuf,
    /// Response CSV, a single column.
    #[arg(long)]
    y: PathBuf,
    /// Hypothesized coefficient CSV, a single column (default: zeros).
    #[arg(long)]
    beta0: Option<PathBuf>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Comma-separated subset of sf,zc,eb,f.
    #[arg(long, default_value = "sf,zc,eb,f", value_delimiter = ',')]
    methods: Vec<String>,
    /// Seed for the EB permutation stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatFlag::Csv)]
    format: FormatFlag,
}

#[derive(Args)]
struct SimulateFlags {
    /// TOML grid file, or the builtin grid name `paper-tables`.
    #[arg(long)]
    grid: String,
    /// Worker threads for replications (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Base seed for per-cell stream derivation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatFlag::Csv)]
    format: FormatFlag,
}

#[derive(Args)]
struct PowerFlags {
    /// TOML power specification file.
    #[arg(long)]
    spec: PathBuf,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatFlag::Csv)]
    format: FormatFlag,
}

fn parse_methods(names: &[String]) -> CliResult<Vec<Method>> {
    if names.is_empty() {
        return Err(Failure::validation("--methods: at least one method required"));
    }
    names
        .iter()
        .map(|name| {
            Method::parse(name.trim()).ok_or_else(|| {
                Failure::validation(format!(
                    "--methods: unknown method {name:?} (expected sf, zc, eb, f)"
                ))
            })
        })
        .collect()
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Test(flags) => cmd_test::run(&cmd_test::TestArgs {
            x: flags.x,
            y: flags.y,
            beta0: flags.beta0,
            alpha: flags.alpha,
            methods: parse_methods(&flags.methods)?,
            seed: flags.seed,
            out: flags.out,
            format: flags.format.into(),
        }),
        Command::Simulate(flags) => cmd_simulate::run(&cmd_simulate::SimulateArgs {
            grid: flags.grid,
            threads: flags.threads,
            seed: flags.seed,
            out: flags.out,
            format: flags.format.into(),
        }),
        Command::Power(flags) => cmd_power::run(&cmd_power::PowerArgs {
            spec: flags.spec,
            out: flags.out,
            format: flags.format.into(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
