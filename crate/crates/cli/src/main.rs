use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use dampflow_cli::app;
use dampflow_cli::config::{FitConfig, RunConfig, SymbolCheckConfig};

/// Pseudo-spectral solver for damped isothermal compressible flow on a
/// periodic box.
///
/// The environment variable THREADS caps the worker threads; results do not
/// depend on it.
#[derive(Parser)]
#[command(name = "dampflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration (a JSON file or a preset name) and write CSV and
    /// JSON report.
    Simulate { config: PathBuf },
    /// Fit the low-frequency decay of every Green-symbol block.
    SymbolCheck { config: PathBuf },
    /// Refit decay exponents from a run CSV.
    DecayFit { csv: PathBuf, fit: PathBuf },
    /// Write the configured initial condition as a snapshot.
    MakeIc {
        config: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| anyhow::anyhow!("THREADS = {value:?} is not a positive integer"))?;
    if threads == 0 {
        anyhow::bail!("THREADS must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn status(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECKS_FAILED)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => {
            let cfg = RunConfig::load(&config)?;
            let out = app::simulate(&cfg)?;
            if !out.passed {
                log::error!("run status {:?}; one or more checks failed", out.report.status);
            }
            Ok(status(out.passed))
        }
        Command::SymbolCheck { config } => {
            let text = std::fs::read_to_string(&config)?;
            let out = app::symbol_check(&SymbolCheckConfig::parse(&text)?)?;
            Ok(status(out.passed))
        }
        Command::DecayFit { csv, fit } => {
            let text = std::fs::read_to_string(&fit)?;
            let out = app::decay_fit(&csv, &FitConfig::parse(&text)?)?;
            Ok(status(out.passed))
        }
        Command::MakeIc { config, output } => {
            app::make_ic(&RunConfig::load(&config)?, &output)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
