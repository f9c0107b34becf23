use clap::{Parser, Subcommand};
use mda_core::cli::{cmd_run, cmd_validate, threads_from_env, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Monte-Carlo simulator for robot-relayed clustered sensor networks using
/// a multiple-link mobility diversity algorithm.
#[derive(Parser)]
#[command(name = "mda-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the K x L sweep and write powers.csv, selection.csv, manifest.json, summary.txt.
    Run {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Override a config key (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Exit with status 3 if any trend check fails.
        #[arg(long)]
        assert_trends: bool,
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
    },
    /// Check a config file against every invariant.
    Validate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run { config, out, overrides, assert_trends, seed } => cmd_run(&RunOptions {
            config,
            out,
            overrides,
            assert_trends,
            seed,
            threads: threads_from_env(),
        }),
        Command::Validate { config } => cmd_validate(&config),
    };
    ExitCode::from(code as u8)
}
