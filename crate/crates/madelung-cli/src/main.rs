//! `madelung` — command-line front end for the density-manifold
//! simulator: runs one named check suite against a JSON configuration
//! and writes machine-readable artifacts (results.json plus CSV time
//! series) into an output directory.
//!
//! Exit codes: 0 when every check passes, 1 on a tolerance violation,
//! 2 on a configuration error (diagnostics on standard error).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod config;
mod report;
mod suites;

use config::Config;

/// The check suite a subcommand names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Evolve,
    VerifyGeometry,
    BracketCheck,
    GaussianCheck,
    Crossval,
}

impl Suite {
    /// The evolution suites integrate in time and need a step size.
    pub fn needs_dt(self) -> bool {
        matches!(self, Suite::Evolve | Suite::Crossval)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Evolve => "evolve",
            Suite::VerifyGeometry => "verify-geometry",
            Suite::BracketCheck => "bracket-check",
            Suite::GaussianCheck => "gaussian-check",
            Suite::Crossval => "crossval",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "madelung",
    version,
    about = "Check suites for the density-manifold formulation of quantum dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the hydrodynamic flow and check its conservation laws.
    Evolve(RunArgs),
    /// Check the metric, symplectic, and connection identities on
    /// seeded random fields.
    VerifyGeometry(RunArgs),
    /// Check that the lifted Poisson bracket negates the canonical
    /// bracket's lift.
    BracketCheck(RunArgs),
    /// Check the coherent-state quantization identities.
    GaussianCheck(RunArgs),
    /// Cross-validate the flow against the split-step reference and
    /// verify both integrators' convergence orders.
    Crossval(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for results.json and the series CSV files.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command) -> Result<bool> {
    let (suite, args) = match command {
        Command::Evolve(args) => (Suite::Evolve, args),
        Command::VerifyGeometry(args) => (Suite::VerifyGeometry, args),
        Command::BracketCheck(args) => (Suite::BracketCheck, args),
        Command::GaussianCheck(args) => (Suite::GaussianCheck, args),
        Command::Crossval(args) => (Suite::Crossval, args),
    };
    let config = Config::load(&args.config, suite)?;
    let report = match suite {
        Suite::Evolve => suites::run_evolve(&config, args.seed)?,
        Suite::VerifyGeometry => suites::run_verify_geometry(&config, args.seed)?,
        Suite::BracketCheck => suites::run_bracket_check(&config, args.seed)?,
        Suite::GaussianCheck => suites::run_gaussian_check(&config, args.seed)?,
        Suite::Crossval => suites::run_crossval(&config, args.seed)?,
    };
    report.write(&args.out)
}
