//! `spinctl` — experiment runner for spin-chain state-transfer control.
//!
//! Subcommands: `run` executes the configured experiment and writes CSV
//! artifacts, `validate` checks a config without running anything, and
//! `circuit` prints the compiled Trotter circuit for the initial
//! parameters. Exit codes: 0 success, 2 config error, 3 runtime error.

mod config;
mod csvout;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentConfig, SchemeChoice};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(3),
        }
    }
}

/// Every config key, exposed as an optional CLI override.
#[derive(Debug, Args)]
struct Overrides {
    /// Experiment to run
    #[arg(long, value_enum)]
    experiment: Option<Experiment>,
    /// Chain length N
    #[arg(long)]
    n: Option<usize>,
    /// Evolution time T
    #[arg(long)]
    t: Option<f64>,
    /// Trotter slice count L
    #[arg(long)]
    l: Option<usize>,
    /// XX coupling strength
    #[arg(long)]
    jx: Option<f64>,
    /// YY coupling strength
    #[arg(long)]
    jy: Option<f64>,
    /// ZZ coupling strength
    #[arg(long)]
    jz: Option<f64>,
    /// Control parameterization(s)
    #[arg(long, value_enum)]
    scheme: Option<SchemeChoice>,
    /// Number of independent runs R
    #[arg(long)]
    realizations: Option<usize>,
    /// Base seed; realization r uses seed + r
    #[arg(long)]
    seed: Option<u64>,
    /// Stop tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget per run
    #[arg(long)]
    max_iters: Option<usize>,
    /// Local-scheme box half-width
    #[arg(long)]
    local_bound: Option<f64>,
    /// Local-scheme init half-width
    #[arg(long)]
    local_init: Option<f64>,
    /// Global-scheme curvature box half-width
    #[arg(long)]
    c_bound: Option<f64>,
    /// Global-scheme curvature init half-width
    #[arg(long)]
    c_init: Option<f64>,
    /// Profile-center anchor at the first slice
    #[arg(long)]
    di: Option<f64>,
    /// Profile-center anchor at the last slice
    #[arg(long)]
    df: Option<f64>,
    /// Depolarizing probability (noise-compare)
    #[arg(long)]
    noise_p: Option<f64>,
    /// Control-effort penalty weight
    #[arg(long)]
    lambda: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! take {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { cfg.$target = v; })*
            };
        }
        take! {
            experiment => experiment, n => n_sites, t => horizon, l => n_slices,
            jx => jx, jy => jy, jz => jz, scheme => scheme,
            realizations => realizations, seed => seed, tol => tol,
            max_iters => max_iters, local_bound => local_bound,
            local_init => local_init, c_bound => c_bound, c_init => c_init,
            noise_p => noise_p, lambda => lambda, out => out,
        }
        if self.di.is_some() {
            cfg.di = self.di;
        }
        if self.df.is_some() {
            cfg.df = self.df;
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinctl", about = "Spin-chain state-transfer control experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured experiment and write CSV artifacts
    Run {
        /// Path to a key=value config file
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Parse and check a config without running it
    Validate {
        /// Path to a key=value config file
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the compiled circuit for the initial parameters
    Circuit {
        /// Path to a key=value config file
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(config: &PathBuf, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config, overrides } => {
            let cfg = load(config, overrides)?;
            experiments::run(&cfg)
        }
        Command::Validate { config, overrides } => {
            let cfg = load(config, overrides)?;
            println!(
                "ok: experiment={} n={} t={} l={} scheme={} realizations={} seed={}",
                cfg.experiment,
                cfg.n_sites,
                cfg.horizon,
                cfg.n_slices,
                cfg.scheme,
                cfg.realizations,
                cfg.seed,
            );
            Ok(())
        }
        Command::Circuit { config, overrides } => {
            let cfg = load(config, overrides)?;
            print!("{}", experiments::initial_circuit_text(&cfg)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("spinctl: {err}");
            err.exit_code()
        }
    }
}
