use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use endomarket::run::{execute, Command, Options};

/// Participation equilibria of data marketplaces with endogenous privacy costs.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides the configured path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of grid points for the numeric solver.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Residual tolerance for the numeric solver.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Single oracle seed, replacing the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress reports and progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Equilibria at a single price, as CSV.
    Solve,
    /// Equilibria over a range of prices, as CSV and optionally SVG.
    Sweep,
    /// Compare closed-form, numeric and oracle equilibria.
    Validate,
    /// Render an SVG from a sweep CSV.
    Plot {
        /// CSV produced by `sweep`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, input) = match cli.command {
        Cmd::Solve => (Command::Solve, None),
        Cmd::Sweep => (Command::Sweep, None),
        Cmd::Validate => (Command::Validate, None),
        Cmd::Plot { input } => (Command::Plot, input),
    };
    let opts = Options {
        config: cli.config,
        out: cli.out,
        input,
        grid: cli.grid,
        tol: cli.tol,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    match execute(
        command,
        &opts,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    ) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("endomarket: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
