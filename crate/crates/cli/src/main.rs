use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varcrit::app::{run_file, Mode, RunOptions};

/// Hypothesis checks and multiple-solution search for Au = λf(u) + h(u).
#[derive(Parser)]
#[command(name = "varcrit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, Lipschitz and oscillation checks, λ-interval.
    Analyze(Common),
    /// Multistart search for solutions.
    Solve(Common),
    /// Sublevel cascade along the level schedule.
    Cascade(Common),
    /// Grid problem with per-solution grid export.
    Grid(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    config: PathBuf,
    /// Proceed past failed hypothesis checks; outputs are watermarked.
    #[arg(long)]
    override_hypotheses: bool,
    /// Seed for every random draw; overrides solver.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors count as configuration errors
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (mode, common) = match cli.command {
        Command::Analyze(c) => (Mode::Analyze, c),
        Command::Solve(c) => (Mode::Solve, c),
        Command::Cascade(c) => (Mode::Cascade, c),
        Command::Grid(c) => (Mode::Grid, c),
    };
    let opts = RunOptions { override_hypotheses: common.override_hypotheses, seed: common.seed, out: common.out };
    match run_file(mode, &common.config, &opts) {
        Ok(summary) => {
            print!("{}", summary.text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("varcrit {mode}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
