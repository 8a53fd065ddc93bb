//! `mgtlab <subcommand> --config <path> [--out <dir>]`
//!
//! Exit status: 0 on success, 1 for unreadable or invalid configuration,
//! 2 when the experiment itself fails. `MGTLAB_THREADS` caps the worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mgtlab::experiment::{run, ExperimentConfig, Subcommand};
use mgtlab::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Basis,
    Roots,
    Kernels,
    Simulate,
    Dual,
    DualityCheck,
    Control,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Basis => Subcommand::Basis,
            Command::Roots => Subcommand::Roots,
            Command::Kernels => Subcommand::Kernels,
            Command::Simulate => Subcommand::Simulate,
            Command::Dual => Subcommand::Dual,
            Command::DualityCheck => Subcommand::DualityCheck,
            Command::Control => Subcommand::Control,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mgtlab", version, about = "Nonlocal MGT exterior-controllability experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output root; overrides `output_dir` from the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("MGTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| format!("MGTLAB_THREADS={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("mgtlab: {msg}");
        return ExitCode::from(EXIT_VALIDATION);
    }
    let bytes = match std::fs::read(&cli.config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("mgtlab: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let config = match std::str::from_utf8(&bytes)
        .map_err(|e| Error::Config(format!("configuration is not UTF-8: {e}")))
        .and_then(ExperimentConfig::from_json)
    {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mgtlab: {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let out = cli.out.or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("mgtlab-out"));
    match run(cli.command.into(), &config, &bytes, &out) {
        Ok(summary) => {
            for f in &summary.files {
                println!("{}", summary.directory.join(f).display());
            }
            println!("{}", summary.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e @ (Error::Config(_) | Error::InvalidParams(_))) => {
            eprintln!("mgtlab: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(e) => {
            eprintln!("mgtlab: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
