use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;
mod report;

use error::CliResult;

/// Certify, solve and verify discrete-time Riccati systems `(A, R, S)`.
#[derive(Parser, Debug)]
#[command(name = "riccati-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the controllability and observability rank conditions.
    Certify {
        /// System file (JSON)
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compute the fixed points and closed-loop data.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run the residual checks over random (P, Q) pairs.
    Verify(VerifyArgs),
    /// Write a random certified system.
    Generate(GenerateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Fixed-point tolerance; overrides RICCATI_LAB_TOL
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = riccati_core::dare::MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    pub path: PathBuf,
    /// Horizon; defaults to the state dimension
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate trials concurrently (report order is unchanged)
    #[arg(long)]
    pub parallel: bool,
    /// Skip the Floquet checks, which need n >= dim
    #[arg(long)]
    pub skip_floquet: bool,
    /// Include wall-clock timing in the report
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct GenerateArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Spectral radius A is rescaled to
    #[arg(long, default_value_t = 1.1)]
    pub spectral_radius: f64,
    /// Rank of the Gram part of R (default: dim)
    #[arg(long)]
    pub rank_r: Option<usize>,
    /// Rank of the Gram part of S (default: dim)
    #[arg(long)]
    pub rank_s: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub ridge_r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub ridge_s: f64,
    #[arg(long)]
    pub name: Option<String>,
    /// Output file; stdout if omitted
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Certify { path, json } => commands::certify(&path, json),
        Command::Solve { path, solver, json } => commands::solve(&path, &solver, json),
        Command::Verify(args) => commands::verify(&args),
        Command::Generate(args) => commands::generate(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with status 0; real usage errors
            // use status 1 so that 2 keeps meaning "not certified"
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("riccati-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

