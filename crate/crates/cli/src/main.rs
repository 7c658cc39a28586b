mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use commands::{Scenario, VerificationFailed};
use config::{ConfigError, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "influence",
    version,
    about = "Solve, verify and sweep menus of persuasive tests"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (strict JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Number of equal-mass cells for the oracle (overrides the config).
    #[arg(long, global = true)]
    oracle_n: Option<usize>,
    /// Type grid size for verification and curves (overrides the config).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Accepted for reproducible batch scripts; every command is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal menu (menu.json) and utility curve (utility.csv).
    Solve,
    /// Grid check of the menu's constraints (violations.json).
    Verify {
        /// Verify a saved menu.json instead of re-solving.
        #[arg(long)]
        menu: Option<std::path::PathBuf>,
    },
    /// Discrete linear-programming benchmark (oracle.json, gap.json).
    Oracle,
    /// Menu with a committed outside option (coercion.json).
    Coerce,
    /// Single access price (access.json).
    Access,
    /// Receiver welfare across regimes (welfare.json).
    Welfare,
    /// One row per parameter value (sweep.csv).
    Sweep,
    /// Plot series (polytope.csv, utility_curve.csv, coercion_curve.csv, prior_drop.csv).
    Figures,
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut cfg = ScenarioConfig::load(&path)?;
    if let Some(n) = cli.oracle_n {
        if n < 2 {
            return Err(ConfigError("--oracle-n must be at least 2".into()).into());
        }
        cfg.solver.oracle_n = n;
    }
    if let Some(g) = cli.grid {
        if g < 2 {
            return Err(ConfigError("--grid must be at least 2".into()).into());
        }
        cfg.solver.grid_size = g;
    }
    let _ = cli.seed;
    let s = Scenario::new(cfg, &cli.out)?;
    match cli.command {
        Command::Solve => commands::solve(&s),
        Command::Verify { ref menu } => commands::verify(&s, menu.as_deref()),
        Command::Oracle => commands::oracle(&s),
        Command::Coerce => commands::coerce(&s),
        Command::Access => commands::access(&s),
        Command::Welfare => commands::welfare(&s),
        Command::Sweep => commands::sweep(&s),
        Command::Figures => commands::figures(&s),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        2
    } else if err
        .downcast_ref::<influence::Error>()
        .is_some_and(|e| e.is_scope())
    {
        3
    } else if err.downcast_ref::<VerificationFailed>().is_some() {
        4
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
