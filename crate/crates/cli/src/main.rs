use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use udw_harvest_cli::run::{self, Completion, RunOptions};
use udw_harvest_cli::{presets, Config};

/// Entanglement harvested by two detectors near a reflecting boundary.
///
/// Exit status: 0 when every row converged, 2 when rows were flagged and 1
/// on configuration or IO errors.
#[derive(Parser)]
#[command(name = "udw-harvest", version)]
struct Cli {
    /// Worker threads for sweeps, all cores by default.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Relative tolerance of the double integrals.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one configuration and print P, X and the concurrence.
    Point {
        config: PathBuf,
        /// Also write the values as a one-row CSV table.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate the observables along the [sweep] grid.
    Sweep(TableArgs),
    /// Locate the [threshold] target at every point of the [sweep] grid.
    Threshold(TableArgs),
    /// Run every curve of a figure preset into a directory.
    Preset {
        /// fig1 to fig9, optionally with a panel letter such as fig2a.
        name: String,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Configuration or manifest file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a figure preset instead of a configuration; the output is then a
    /// directory.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    output: PathBuf,
}

fn table(args: TableArgs, opts: &RunOptions, threshold: bool) -> Result<Completion> {
    if let Some(name) = args.preset {
        let wanted = if threshold {
            presets::JobKind::Threshold
        } else {
            presets::JobKind::Sweep
        };
        if presets::jobs(&name)?.iter().any(|j| j.kind != wanted) {
            bail!("preset {name} does not match this subcommand; use `preset {name}`");
        }
        return run::cmd_preset(&name, &args.output, opts);
    }
    let config: Config = run::read_config(&args.config.expect("clap requires a configuration"))?;
    if threshold {
        run::cmd_threshold(&config, &args.output, opts)
    } else {
        run::cmd_sweep(&config, &args.output, opts)
    }
}

fn execute(cli: Cli) -> Result<Completion> {
    let opts = RunOptions {
        threads: cli.threads.map(|n| n as usize),
        tol: cli.tol,
    };
    match cli.command {
        Command::Point { config, output } => {
            let config = run::read_config(&config)?;
            let (report, completion) = run::cmd_point(&config, output.as_deref(), &opts)?;
            print!("{report}");
            Ok(completion)
        }
        Command::Sweep(args) => table(args, &opts, false),
        Command::Threshold(args) => table(args, &opts, true),
        Command::Preset { name, output } => run::cmd_preset(&name, &output, &opts),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(completion) => ExitCode::from(completion.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
