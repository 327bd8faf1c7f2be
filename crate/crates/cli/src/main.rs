//! `trilocal`: violation search, scans, thresholds, swapped-state analysis
//! and LHV checks for source-independent quantum networks.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::Failure;
use config::Config;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "trilocal", version, about = "Trilocal and n-local Bell-inequality simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags of the same name override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Config,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the trilocal and local scores for one family point.
    Violation(Common),
    /// Trilocal and local scores over a grid of one family parameter.
    Scan(Common),
    /// Noise level where the optimized trilocal score crosses 1.
    Threshold(Common),
    /// All 16 swapped states with negativities and separability criteria.
    Swap(Common),
    /// The tightness model and the deterministic vertices.
    LhvCheck(Common),
    /// Optimized score of an n-local star network.
    Nlocal(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Violation(_) => "violation",
            Command::Scan(_) => "scan",
            Command::Threshold(_) => "threshold",
            Command::Swap(_) => "swap",
            Command::LhvCheck(_) => "lhv-check",
            Command::Nlocal(_) => "nlocal",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Violation(c)
            | Command::Scan(c)
            | Command::Threshold(c)
            | Command::Swap(c)
            | Command::LhvCheck(c)
            | Command::Nlocal(c) => c,
        }
    }
}

fn resolve(common: &Common) -> Result<Config, Failure> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.overlay(&common.flags);
    cfg.resolve_common()?;
    Ok(cfg)
}

fn run(command: &Command) -> Result<(), Failure> {
    let start = Instant::now();
    let mut cfg = resolve(command.common())?;
    if let Some(t) = cfg.threads {
        trilocal_core::exec::init_threads(t);
    }
    let results = match command {
        Command::Violation(_) => commands::violation(&cfg)?,
        Command::Scan(_) => {
            let (values, rows) = commands::scan(&cfg)?;
            if let Some(path) = &cfg.csv {
                commands::write_csv(path.as_ref(), &rows)?;
            }
            values
        }
        Command::Threshold(_) => commands::threshold(&mut cfg)?,
        Command::Swap(_) => commands::swap(&cfg)?,
        Command::LhvCheck(_) => commands::lhv_check(&mut cfg)?,
        Command::Nlocal(_) => commands::nlocal(&mut cfg)?,
    };
    let report = json!({
        "command": command.name(),
        "config": cfg,
        "results": results,
        "version": env!("CARGO_PKG_VERSION"),
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cfg.output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Failure::Config(format!("{path}: {e}")))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
