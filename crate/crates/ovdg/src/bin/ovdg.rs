//! Command line driver: named presets, key=value config files, and
//! command-line overrides in front of the run and convergence drivers.
//!
//! Exit codes sort failures by category: 2 for configuration problems,
//! 3 for runtime aborts, 4 for I/O, so scripts can tell a typo from a
//! blown-up run.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ovdg::config::{ExperimentConfig, Origin, Problem};
use ovdg::diagnostics::convergence_text;
use ovdg::error::{OvdgError, Result};
use ovdg::runner;

#[derive(Parser)]
#[command(name = "ovdg", version, about = "Discontinuous Galerkin experiments in one dimension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one simulation and print its summary.
    Run(Job),
    /// Run every resolution in the sweep and print the error/order tables.
    Convergence(Job),
    /// List the named experiment presets.
    ListPresets,
}

#[derive(Args)]
struct Job {
    /// Named preset to start from (see list-presets).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,

    /// Flat key=value file; its problem key selects the base preset.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable, wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory; shorthand for --set out_dir=DIR.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Job {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), None) => ExperimentConfig::preset(Problem::from_name(name)?),
            (None, Some(path)) => ExperimentConfig::from_file(path)?,
            (None, None) => {
                return Err(OvdgError::InvalidConfig(
                    "pass --preset NAME or --config FILE".to_string(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        };
        for pair in &self.set {
            let (k, v) = pair.split_once('=').ok_or_else(|| {
                OvdgError::InvalidConfig(format!("--set {pair:?}: expected KEY=VALUE"))
            })?;
            cfg.apply(k.trim(), v.trim(), Origin::User)?;
        }
        if let Some(dir) = &self.out {
            cfg.apply("out_dir", &dir.display().to_string(), Origin::User)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(job) => {
            let report = runner::run(&job.resolve()?)?;
            print!("{}", report.summary());
        }
        Command::Convergence(job) => {
            let tables = runner::convergence(&job.resolve()?)?;
            print!("{}", convergence_text(&tables));
        }
        Command::ListPresets => {
            for p in Problem::ALL {
                println!("{:<16} {}", p.name(), p.summary());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
