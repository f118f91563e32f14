mod commands;
mod config;
mod output;
mod svg;

use clap::{Parser, Subcommand};
use commands::{exit_code, write_diagnostics, Diagnostic, Outcome};
use config::Experiment;
use std::path::PathBuf;
use std::process::ExitCode;

/// Zero counts, remainder certificates, sector laws and Green-function benchmarks from a
/// config file (`.toml` or `.json`).
#[derive(Parser)]
#[command(name = "holozeros", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact zero counts over the `h` grid.
    Count { config: PathBuf },
    /// Count certificates against the Weyl prediction and remainder budget.
    Certify { config: PathBuf },
    /// Sector counts against the angular Riesz mass over the `R` grid.
    Sector { config: PathBuf },
    /// Finite-difference Green function benchmark.
    Green { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, path, run): (&str, _, fn(&Experiment) -> holozeros::Result<Outcome>) = match cli.command {
        Command::Count { config } => ("count", config, commands::count),
        Command::Certify { config } => ("certify", config, commands::certify),
        Command::Sector { config } => ("sector", config, commands::sector),
        Command::Green { config } => ("green", config, commands::green),
    };
    let ex = match Experiment::load(&path) {
        Ok(ex) => ex,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(64);
        }
    };
    match run(&ex) {
        Ok(out) => {
            println!("{name}: {}", out.summary);
            ExitCode::from(out.exit)
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if code != 64 {
                if let Err(w) = write_diagnostics(&ex, name, &[Diagnostic::new(None, &e)]) {
                    eprintln!("error: {w}");
                }
            }
            ExitCode::from(code)
        }
    }
}
