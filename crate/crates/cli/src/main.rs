//! `gnls` — forward and inverse scattering experiments for the
//! one-dimensional equation `-u'' + Q(x, u) u = k^2 u` with a compactly
//! supported, amplitude-dependent potential.

mod commands;
mod config;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Error classes mapped to exit codes: configuration/validation problems
/// exit with 2, numerical failures with 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl From<gnls_core::Error> for CliError {
    fn from(e: gnls_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical error: {msg}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gnls",
    version,
    about = "Forward and inverse scattering for a 1-D Schrödinger equation with an amplitude-dependent potential"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Reserved; the pipeline is deterministic and uses no randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nonlinear scattering problem over a (k, eps) table and
    /// write the sweep.
    Forward {
        #[arg(long)]
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit amplitude-series coefficients to a sweep table.
    Extract {
        #[arg(long)]
        config: PathBuf,
        /// Sweep table produced by `forward`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover potential coefficients from order-n data.
    Invert {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full synthesize -> extract -> invert demonstration with an error
    /// report against the configured truth.
    Roundtrip {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the closed-form worked examples end to end.
    Example {
        /// `constant_gamma` or `exponential_alpha`.
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in invariant suite and print a pass/fail table.
    Selfcheck {
        /// Also write the table and a manifest to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("warning: could not configure {} threads: {e}", cli.threads);
        }
    }

    let result = match &cli.command {
        Command::Forward { config, out } => commands::forward::run(config, out.as_deref()),
        Command::Extract { config, input, out } => {
            commands::extract::run(config, input, out.as_deref())
        }
        Command::Invert { config, out } => commands::invert::run(config, out.as_deref()),
        Command::Roundtrip { config, out } => commands::roundtrip::run(config, out.as_deref()),
        Command::Example { name, out } => commands::example::run(name, out),
        Command::Selfcheck { out } => commands::selfcheck::run(out.as_deref()),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numerical(_) => ExitCode::from(1),
            }
        }
    }
}
