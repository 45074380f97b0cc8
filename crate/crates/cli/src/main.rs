use std::path::PathBuf;
use std::process::exit;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use fixpoint_cli::{execute, Command};

/// Approximate fixed points of nonexpansive-type maps by averaged
/// iteration, classify operators by their contractivity constants, and
/// verify the scheme's invariants.
#[derive(Parser)]
#[command(name = "fixpoint", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the averaged iteration; emits a trajectory CSV and a report JSON
    Iterate(RunArgs),
    /// Estimate Lipschitz/pseudocontractivity/enrichment constants and
    /// derived step sizes
    Classify(RunArgs),
    /// Race two step sizes toward a fixed point
    Compare(RunArgs),
    /// Run the invariant battery; exits nonzero when any check fails
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for emitted CSV/JSON files
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // usage problems are config errors
            };
            let _ = err.print();
            exit(code);
        }
    };

    let (command, args) = match &cli.command {
        Cmd::Iterate(args) => (Command::Iterate, args),
        Cmd::Classify(args) => (Command::Classify, args),
        Cmd::Compare(args) => (Command::Compare, args),
        Cmd::Verify(args) => (Command::Verify, args),
    };

    match execute(command, &args.config, &args.out_dir) {
        Ok(code) => exit(code),
        Err(err) => {
            eprintln!("error: {}", err.message);
            exit(err.code());
        }
    }
}
