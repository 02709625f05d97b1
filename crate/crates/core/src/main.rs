use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degenwave::cli::{run_command, run_sweep, Command};

/// Degenerate wave equations with drift and boundary damping.
#[derive(Parser)]
#[command(name = "degenwave", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Degeneracy constant, classification and hypothesis checks.
    Classify(Single),
    /// Hardy–Poincaré and norm-equivalence constants.
    Check(Single),
    /// Time integration: trace CSV and snapshots.
    Simulate(Single),
    /// Eigenvalues of the discrete generator.
    Spectrum(Single),
    /// Full stability report with plot data.
    Report(Single),
    /// `report` on several scenarios concurrently.
    Sweep {
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Single {
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, single) = match args.command {
        Cmd::Classify(s) => (Command::Classify, s),
        Cmd::Check(s) => (Command::Check, s),
        Cmd::Simulate(s) => (Command::Simulate, s),
        Cmd::Spectrum(s) => (Command::Spectrum, s),
        Cmd::Report(s) => (Command::Report, s),
        Cmd::Sweep { configs, out } => return ExitCode::from(run_sweep(&configs, out.as_deref()) as u8),
    };
    ExitCode::from(run_command(command, &single.config, single.out.as_deref()) as u8)
}
