//! Batch CLI for learning-over-samplable-distributions experiments.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 when a run
//! completes but a configured bound is violated, so CI can gate on the
//! measured inequalities.

mod config;
mod report;
mod runs;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RawConfig;
use report::Report;

#[derive(Parser)]
#[command(
    name = "invlearn",
    version,
    about = "Learning over samplable distributions: experiments, inverter verification, amplification demos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a learning experiment described by a config file.
    Learn(RunArgs),
    /// Verify the bit inverter over a grid by exhaustive enumeration.
    InvertSuite(RunArgs),
    /// Run the inversion amplification chain and measure each rung.
    Amplify(RunArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Additional key=value overrides, repeatable.
    #[arg(long = "set")]
    set: Vec<String>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(exit_code) => std::process::exit(exit_code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let (args, runner): (&RunArgs, fn(&RawConfig) -> Result<Report>) = match &cli.command {
        Command::Learn(args) => (args, runs::run_learn),
        Command::InvertSuite(args) => (args, runs::run_invert_suite),
        Command::Amplify(args) => (args, runs::run_amplify),
    };
    let mut config = RawConfig::load(&args.config)?;
    config.apply_overrides(&args.set)?;
    if let Some(seed) = args.seed {
        config.set("seed", seed.to_string());
    }

    let start = Instant::now();
    let mut report = runner(&config)?;
    report.wall_ms = start.elapsed().as_millis();

    let rendered = match args.format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    };
    match &args.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    Ok(if report.violation { 3 } else { 0 })
}
