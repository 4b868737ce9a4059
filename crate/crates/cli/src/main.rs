//! `qchain`: batch front end for steady states, transients, sweeps and
//! drift spectra of open harmonic chains.
//!
//! Exit codes: 0 ok, 1 I/O, 2 configuration, 3 no steady state, 4 solver
//! failure. Failures print a one-line JSON object on stderr.

mod config;
mod error;
mod run;
mod table;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Format, Mode, RunConfig};
use error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "qchain", version, about = "Heat transport in open quantum harmonic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state occupations and currents.
    Steady(RunArgs),
    /// Time evolution of occupations, energy and current.
    Evolve(RunArgs),
    /// Parameter sweep described by the `[sweep]` section.
    Sweep(RunArgs),
    /// Eigenvalues of the drift matrix and the normal-mode frequencies.
    Spectrum(RunArgs),
    /// Check a configuration without solving; prints JSON diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Mode to check against; defaults to the config's own.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`, defaults to `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random couplings; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn run(mode: Mode, args: &RunArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
        cfg.overrides.seed = None;
    }
    let output = cfg.output.clone().unwrap_or_default();
    let dir = args.out.clone().or(output.dir).unwrap_or_else(|| PathBuf::from("out"));
    let format = args.format.or(output.format).unwrap_or_default();
    let outcome = run::execute(mode, &cfg)?;
    for path in outcome.write(&dir, format)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Steady(a) => run(Mode::Steady, a),
        Command::Evolve(a) => run(Mode::Evolve, a),
        Command::Sweep(a) => run(Mode::Sweep, a),
        Command::Spectrum(a) => run(Mode::Spectrum, a),
        Command::Validate { config, mode } => {
            let diagnostics = validate::validate_file(config, *mode);
            let report = serde_json::json!({
                "config": config.display().to_string(),
                "diagnostics": diagnostics,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("diagnostics serialize")
            );
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.structured());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
