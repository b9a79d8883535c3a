//! The `fnls-lab` command line: `run <config>` and `verify [--filter <module>]`.

pub mod config;
pub mod output;
pub mod scenarios;
pub mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{LabError, Result};
use config::ExperimentConfig;
use output::{error_record, sha256_hex, write_report, GridInfo, Report, Reproducibility};

pub const THREADS_ENV: &str = "FNLS_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fnls-lab",
    version,
    about = "Pseudospectral lab for fractional NLS and Hartree equations"
)]
pub struct Cli {
    /// Directory for results.json, CSV tables and the checkpoint.
    #[arg(long, global = true, default_value = "results")]
    pub out_dir: PathBuf,
    /// Worker threads (also read from FNLS_LAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Replaces the seed of the configuration.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Runs the scenario described by a TOML configuration.
    Run { config: PathBuf },
    /// Runs the property suite, optionally for one module.
    Verify {
        #[arg(long)]
        filter: Option<String>,
    },
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| {
            LabError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if let Some(n) = thread_count(cli.threads)? {
        if n == 0 {
            return Err(LabError::Config("thread count must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    let (scenario, repro, report): (&str, Reproducibility, Report) = match &cli.command {
        Command::Run { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(seed) = cli.seed_override {
                cfg.seed = seed;
            }
            let report = scenarios::run_scenario(&cfg)?;
            let repro = Reproducibility {
                config_hash: sha256_hex(cfg.canonical().as_bytes()),
                seed: cfg.seed,
                grid: cfg.grid().ok().map(GridInfo::from),
                version: env!("CARGO_PKG_VERSION").into(),
                rng: "ChaCha8",
            };
            (cfg.scenario.name(), repro, report)
        }
        Command::Verify { filter } => {
            let seed = cli.seed_override.unwrap_or(0);
            let report = scenarios::verify(filter.as_deref(), seed)?;
            let canonical =
                serde_json::json!({ "command": "verify", "filter": filter, "seed": seed });
            let repro = Reproducibility {
                config_hash: sha256_hex(canonical.to_string().as_bytes()),
                seed,
                grid: None,
                version: env!("CARGO_PKG_VERSION").into(),
                rng: "ChaCha8",
            };
            for q in &report.quantities {
                eprintln!("{:<50} {}", q.name, q.value);
            }
            ("verify", repro, report)
        }
    };
    write_report(&cli.out_dir, scenario, &repro, &report)?;
    Ok(report.passed)
}

/// Entry point of the binary. Exit codes: 0 success, 1 module or configuration
/// error (an error record is printed to stderr and written to `error.json`),
/// 2 scenario ran but a check failed.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let record = error_record(&e);
            eprintln!("{record}");
            if std::fs::create_dir_all(&cli.out_dir).is_ok() {
                let _ = std::fs::write(cli.out_dir.join("error.json"), format!("{record}\n"));
            }
            ExitCode::from(1)
        }
    }
}
