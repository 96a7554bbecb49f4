//! Thin command-line front end: validate or run experiment configs.
//! All real work lives in the library (`config`, `runner`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mdmsim::config::ExperimentConfig;
use mdmsim::runner;

#[derive(Parser)]
#[command(
    name = "mdmsim",
    about = "Simulator of mode-multiplexed photonic weight banks",
    long_about = None,
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a config file and run its experiment.
    ///
    /// Data files land in the config's output_dir unless the
    /// MDMSIM_OUTPUT_DIR environment variable overrides it; a manifest
    /// with SHA-256 checksums is written alongside.
    Run { config: PathBuf },
    /// Check a config file without producing any files.
    Validate { config: PathBuf },
    /// Print the simulator version.
    Version,
}

fn main() -> ExitCode {
    env_logger::init();
    match execute(Cli::parse()) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> mdmsim::Result<String> {
    match cli.command {
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let result = runner::run(&config)?;
            Ok(format!(
                "{}\nwrote {} files to {}",
                result.summary,
                result.files.len(),
                result.dir.display()
            ))
        }
        Command::Validate { config } => {
            let loaded = ExperimentConfig::load(&config)?;
            Ok(format!(
                "ok: {} config with seed {} is valid",
                loaded.experiment, loaded.seed
            ))
        }
        Command::Version => Ok(format!(
            "{} {}",
            env!("CARGO_PKG_NAME"),
            env!("CARGO_PKG_VERSION")
        )),
    }
}
