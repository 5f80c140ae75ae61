use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spacemimo::cli::{error_record, run, Overrides, Subcommand};

/// Capacity analysis for long-range free-space MIMO links.
#[derive(Parser, Debug)]
#[command(name = "spacemimo", version)]
struct Args {
    /// One of: siso, mimo-sample, ergodic, bounds, prolate, achievability, design, moments, scan
    #[arg(value_parser = parse_subcommand)]
    subcommand: Subcommand,
    /// Scenario file (flat `key = value`)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV reports
    #[arg(long)]
    out: PathBuf,
    /// Overrides `trials` from the config
    #[arg(long)]
    trials: Option<u64>,
    /// Overrides `seed` from the config
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_subcommand(s: &str) -> Result<Subcommand, String> {
    Subcommand::from_name(s).ok_or_else(|| format!("unknown subcommand `{s}`"))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        trials: args.trials,
        seed: args.seed,
    };
    match run(args.subcommand, &args.config, &args.out, &overrides) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
