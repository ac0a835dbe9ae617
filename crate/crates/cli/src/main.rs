use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use koopspin::config::RunConfig;
use koopspin::{pipeline, report, ErrorKind};

/// Simulate a dephasing Heisenberg chain, learn a reduced-rank Koopman
/// operator from the trajectory, and analyze its spectrum.
#[derive(Debug, Parser)]
#[command(name = "koopspin", version)]
struct Cli {
    /// Flat `key = value` config file; unspecified keys keep their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for all artifacts (overrides `output_dir` from the config).
    #[arg(long, global = true, value_name = "PATH")]
    output_dir: Option<PathBuf>,

    /// Override one config key, e.g. `--set gamma=0.02`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the master equation and write trajectory.txt.
    Simulate,
    /// Fit the reduced-rank estimator and write estimator.txt.
    Fit,
    /// Forecast the configured observables and write forecast.csv.
    Forecast,
    /// Eigenvalues, decay rates and frequencies to modes.csv.
    Modes,
    /// Steady-mode commutation with the total S^z; writes symmetry.txt.
    Symmetry,
    /// Evaluate every acceptance check and write report.json.
    Report,
}

fn resolve_config(cli: &Cli) -> koopspin::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> koopspin::Result<()> {
    let cfg = resolve_config(cli)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Simulate => pipeline::cmd_simulate(&cfg, &mut out),
        Command::Fit => pipeline::cmd_fit(&cfg, &mut out),
        Command::Forecast => pipeline::cmd_forecast(&cfg, &mut out),
        Command::Modes => pipeline::cmd_modes(&cfg, &mut out),
        Command::Symmetry => pipeline::cmd_symmetry(&cfg, &mut out),
        Command::Report => report::cmd_report(&cfg, &mut out),
    }?;
    let _ = out.flush();
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Numerical => 2,
                ErrorKind::Io => 3,
            })
        }
    }
}
