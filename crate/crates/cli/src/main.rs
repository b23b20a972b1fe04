use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaudin_core::workbench::{cmd_schubert, cmd_spectrum, cmd_verify, InstanceConfig};
use gaudin_core::Error;
use serde::Serialize;

/// Gaudin spectra and their operator-side witnesses.
///
/// Tolerances can be overridden with GAUDIN_TOL_CLUSTER, GAUDIN_TOL_RESIDUAL
/// and GAUDIN_TOL_KERNEL; these take precedence over the config file.
#[derive(Parser)]
#[command(name = "gaudin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the spectrum of one instance and check every identity.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time per stage.
        #[arg(long)]
        timing: bool,
    },
    /// Print the intersection number for weights `m` and level `l`.
    Schubert {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long)]
        l: u32,
    },
    /// Re-run the pipeline on random marked points and compare counts.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for failed gates; errors use 2.
const GATE_FAILED: u8 = 1;
const ERROR: u8 = 2;

fn load(path: &Path) -> Result<InstanceConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    InstanceConfig::from_json(&text).map_err(|e| e.to_string())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gate(failed: Vec<String>) -> ExitCode {
    if failed.is_empty() {
        return ExitCode::SUCCESS;
    }
    for name in &failed {
        eprintln!("failed: {name}");
    }
    ExitCode::from(GATE_FAILED)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let err = |e: Error| e.to_string();
    match cli.command {
        Command::Spectrum { config, out, timing } => {
            let report = cmd_spectrum(&load(&config)?, timing).map_err(err)?;
            emit(&report, out.as_deref())?;
            Ok(gate(report.failed_checks()))
        }
        Command::Schubert { m, l } => {
            println!("{}", cmd_schubert(&m, l));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, samples, out } => {
            let report = cmd_verify(&load(&config)?, samples).map_err(err)?;
            emit(&report, out.as_deref())?;
            Ok(gate(report.failed_checks()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(ERROR)
        }
    }
}
