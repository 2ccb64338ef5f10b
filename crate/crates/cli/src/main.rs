//! `kelly` — growth-optimal portfolio fractions from probabilistic price
//! models. See README.md for the spec file format and examples.

mod commands;
mod error;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{SimulateFlags, SweepPlan};
use crate::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "kelly",
    version,
    about = "Growth-optimal (Kelly) portfolio fractions from probabilistic price models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the moment-matrix linear system for the Kelly fractions
    Solve(SolveArgs),
    /// Sweep mu1 and write fractions per method to a CSV dataset
    Sweep(SweepArgs),
    /// Estimate the growth rate of a fraction vector by Monte Carlo
    Simulate(SimulateArgs),
    /// Solve the exact criterion and compare against the linear solve
    Exact(ExactArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Portfolio spec file (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Also print the moment matrix and right-hand side
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Portfolio spec file (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// First mu1 value
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    start: f64,
    /// Last mu1 value
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    stop: f64,
    /// Number of sweep rows (>= 2)
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Comma-separated subset of: closed, conventional, gaussian, linear, exact
    #[arg(long, default_value = "closed,conventional,gaussian,linear")]
    methods: String,
    /// Growth linkage for assets beyond the first: scaled (mu_l = sigma_l*mu1),
    /// uniform (mu_l = mu1), or none (keep spec values)
    #[arg(long, default_value = "scaled")]
    link: String,
    /// Comma-separated correlation overrides (bivariate portfolios only)
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Portfolio spec file (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Comma-separated fractions; defaults to the linear solution projected
    /// onto the admissible simplex
    #[arg(long, allow_hyphen_values = true)]
    fractions: Option<String>,
    /// Rounds per wealth path
    #[arg(long, default_value_t = 1000)]
    rounds: usize,
    /// Independent replications
    #[arg(long, default_value_t = 200)]
    replications: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Compare the growth against +/- delta perturbations per asset
    #[arg(long)]
    verify: bool,
    /// Perturbation size used by --verify
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
}

#[derive(Args)]
struct ExactArgs {
    /// Portfolio spec file (JSON)
    #[arg(long)]
    spec: PathBuf,
}

fn parse_fraction_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>().map_err(|_| {
                CliError::validation(format!("--fractions: `{t}` is not a number"))
            })
        })
        .collect()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve(args) => {
            let loaded = spec::load_spec(&args.spec)?;
            commands::cmd_solve(&loaded, args.verbose, &mut std::io::stdout())
        }
        Command::Sweep(args) => {
            let loaded = spec::load_spec(&args.spec)?;
            let plan = SweepPlan::from_flags(
                args.start,
                args.stop,
                args.steps,
                &args.methods,
                &args.link,
                args.rho.as_deref(),
                &loaded.spec,
            )?;
            commands::cmd_sweep(&loaded, &plan, &args.out, &mut std::io::stderr())
        }
        Command::Simulate(args) => {
            let loaded = spec::load_spec(&args.spec)?;
            let fractions = args
                .fractions
                .as_deref()
                .map(parse_fraction_list)
                .transpose()?;
            let flags = SimulateFlags {
                fractions,
                rounds: args.rounds,
                replications: args.replications,
                seed: args.seed,
                verify: args.verify,
                delta: args.delta,
            };
            commands::cmd_simulate(&loaded, &flags, &mut std::io::stdout())
        }
        Command::Exact(args) => {
            let loaded = spec::load_spec(&args.spec)?;
            commands::cmd_exact(&loaded, &mut std::io::stdout())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
