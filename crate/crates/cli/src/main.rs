mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Format, SimulateArgs};
use config::ConfigDocument;
use error::CliError;

/// Waste Factor calculus, measurement fits, metric comparison and
/// distributed MU-MIMO simulation.
#[derive(Parser)]
#[command(name = "wf", version)]
struct Cli {
    /// Output format (default: json for `fit`, csv otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Power-flow report of a stage cascade.
    Cascade { config: PathBuf },
    /// System WF against channel WF for four improvement strategies.
    System { config: PathBuf },
    /// Fit W and non-path power to a measured power log (CSV).
    Fit { log: PathBuf },
    /// Standard energy-efficiency metrics next to W.
    Metrics { config: PathBuf },
    /// Run the simulation campaign grid.
    Simulate {
        config: PathBuf,
        /// Seeds per grid cell.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Worker threads (default: all logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Directory for drops.csv and aggregate.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn seed_override() -> Result<Option<u64>, CliError> {
    match std::env::var("WF_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("WF_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<String, CliError> {
    let format = cli.format;
    match cli.command {
        Command::Cascade { config } => commands::cascade(&ConfigDocument::load(&config)?, format.unwrap_or(Format::Csv)),
        Command::System { config } => commands::system(&ConfigDocument::load(&config)?, format.unwrap_or(Format::Csv)),
        Command::Fit { log } => commands::fit(&log, format.unwrap_or(Format::Json)),
        Command::Metrics { config } => commands::metrics(&ConfigDocument::load(&config)?, format.unwrap_or(Format::Csv)),
        Command::Simulate { config, seeds, jobs, out } => {
            let doc = ConfigDocument::load(&config)?;
            let args = SimulateArgs { seeds, jobs, out: out.as_deref(), seed_override: seed_override()? };
            commands::simulate(&doc, args, format.unwrap_or(Format::Csv))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
