use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pickforge::commands::{CliError, EXIT_INPUT};
use pickforge::{render, run_check, run_solve, run_verify, ParamSource, RunOptions};

#[derive(Parser)]
#[command(name = "pickforge", version, about = "Norm-constrained interpolation for Schur-class functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// PSD tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample count for both the interior and the boundary grid.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Series truncation tolerance.
    #[arg(long, global = true)]
    truncation: Option<f64>,
    /// Seed for sampled checks and random parameters.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `central`, `random`, or a path to a parameter file.
    #[arg(long, global = true, default_value = "central")]
    param: String,
    /// Write sampled kernel eigenvalues here (`verify` only).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Include wall-clock timing in the report.
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solvability certificate.
    Check { problem: PathBuf },
    /// Central or parametrized solution, verified before it is written.
    Solve { problem: PathBuf },
    /// Residuals and kernel positivity for a candidate realization.
    Verify { problem: PathBuf, candidate: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("PICKFORGE_SEED") {
        Ok(v) => {
            v.trim().parse().map(Some).map_err(|_| CliError::input(format!("PICKFORGE_SEED={v} is not an integer")))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let opts = RunOptions {
        tol: cli.tol,
        grid: cli.grid,
        truncation: cli.truncation,
        seed: cli.seed,
        env_seed: env_seed()?,
        param: ParamSource::parse(&cli.param),
        csv: cli.csv.is_some(),
        timing: cli.timing,
    };
    let outcome = match &cli.command {
        Command::Check { problem } => run_check(&read(problem)?, &opts)?,
        Command::Solve { problem } => run_solve(&read(problem)?, &opts)?,
        Command::Verify { problem, candidate } => run_verify(&read(problem)?, &read(candidate)?, &opts)?,
    };
    let text = render(&outcome.report);
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(csv)) = (&cli.csv, &outcome.csv) {
        std::fs::write(path, csv).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
