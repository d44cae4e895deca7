//! Config-driven experiment runner for the primal-dual inertial dynamics
//! toolkit.
//!
//! ```text
//! pdavd run              --config exp.toml [--out DIR --seed N --t-end F --samples N --strict]
//! pdavd sweep            --config exp.toml [...]      # α×θ grid from [sweep]
//! pdavd compare-nesterov --config exp.toml [...]      # requires a zero constraint
//! pdavd selftest         [--out DIR]
//! ```
//!
//! Exit codes: 0 all requested checks pass, 1 a check failed,
//! 2 configuration/validation error, 3 integration failure.
//! `PDAVD_THREADS` caps sweep parallelism.

mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Integration(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Integration(m) => write!(f, "integration failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Integration(_) => ExitCode::from(3),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub strict: bool,
}

#[derive(Parser)]
#[command(name = "pdavd", version, about = "primal-dual inertial dynamics experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// output directory (overrides out_dir from the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// seed override for seeded problem generation
    #[arg(long)]
    seed: Option<u64>,
    /// end-time override
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// sample-count override
    #[arg(long)]
    samples: Option<usize>,
    /// validate against the strict parameter regime
    #[arg(long)]
    strict: bool,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            seed: self.seed,
            t_end: self.t_end,
            samples: self.samples,
            strict: self.strict,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and emit CSV, JSON, checks and SVG plots
    Run(RunArgs),
    /// Run the α×θ grid from the config's [sweep] table
    Sweep(RunArgs),
    /// Check the zero-constraint reduction against its closed forms
    CompareNesterov(RunArgs),
    /// Quadrature inequality and oracle cross-checks
    Selftest {
        /// optional directory for the selftest report
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => runner::run(&args.config, &args.overrides()),
        Command::Sweep(args) => runner::sweep(&args.config, &args.overrides()),
        Command::CompareNesterov(args) => {
            runner::compare_nesterov(&args.config, &args.overrides())
        }
        Command::Selftest { out } => runner::selftest(out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
