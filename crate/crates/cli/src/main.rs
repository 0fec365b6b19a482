use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use recur_cli::commands::{self, RunContext};
use recur_cli::{exit_code, ExperimentConfig, Outcome};

#[derive(Parser)]
#[command(
    name = "recur",
    version,
    about = "Multiple-recurrence experiments on finite C*-dynamical systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, global = true, env = "RECUR_OUT_DIR")]
    out: Option<PathBuf>,
    /// Single-threaded, bit-reproducible run.
    #[arg(long, global = true)]
    serial: bool,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check the action axioms on random samples.
    Verify,
    /// Net-size certificates over growing windows.
    Compactness,
    /// Recurrence set and syndeticity scan.
    Recurrence,
    /// Multiple-correlation averages.
    Average,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if cli.serial {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global()?;
    }
    let path = cli
        .config
        .ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let config = ExperimentConfig::load(&path)?;
    let ctx = RunContext::new(config, cli.out, cli.tol)?;
    match cli.command {
        Command::Verify => commands::verify(&ctx),
        Command::Compactness => commands::compactness(&ctx),
        Command::Recurrence => commands::recurrence(&ctx),
        Command::Average => commands::average(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
