//! Command-line front end: run analysis scenarios from a config file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dcgle::io::{parse_config, run_scenario, SCENARIO_NAMES};
use dcgle::{ConfigError, ScenarioError};

#[derive(Parser)]
#[command(version, about = "Plane waves of the delayed cubic-quintic Ginzburg-Landau equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file and write its tables.
    Run {
        /// Path to the config file.
        config_path: PathBuf,
        /// Write tables here instead of the configured out_dir.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Run this scenario instead of the configured one.
        #[arg(long, value_name = "NAME")]
        scenario: Option<String>,
        /// Cap the worker thread pool (default: all cores).
        #[arg(long, value_name = "N")]
        threads: Option<usize>,
        /// Cross-check rightmost roots with argument-principle window
        /// counts. Slow.
        #[arg(long)]
        certify_roots: bool,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut cause: &dyn std::error::Error = &e;
            while let Some(source) = cause.source() {
                eprintln!("  caused by: {source}");
                cause = source;
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    let Command::Run {
        config_path,
        out,
        scenario,
        threads,
        certify_roots,
    } = cli.command;
    if let Some(n) = threads {
        if n == 0 {
            return Err(ConfigError::Range {
                key: "threads".to_string(),
                message: "must be at least 1".to_string(),
            }
            .into());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised, --threads ignored: {e}");
        }
    }
    let text = std::fs::read_to_string(&config_path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = out {
        cfg.out_dir = dir;
    }
    if let Some(name) = scenario {
        if !SCENARIO_NAMES.contains(&name.as_str()) {
            return Err(ConfigError::Range {
                key: "scenario".to_string(),
                message: format!(
                    "'{name}' is not a scenario (expected one of: {})",
                    SCENARIO_NAMES.join(", ")
                ),
            }
            .into());
        }
        cfg.scenario = name;
    }
    cfg.certify_roots |= certify_roots;
    if let Ok(raw) = std::env::var("DCGLE_SEED") {
        cfg.sim.seed = raw.parse().map_err(|_| ConfigError::Range {
            key: "DCGLE_SEED".to_string(),
            message: format!("'{raw}' is not an unsigned integer seed"),
        })?;
    }
    let artifacts = run_scenario(&cfg)?;
    for artifact in &artifacts {
        println!(
            "wrote {}",
            cfg.out_dir.join(format!("{}.csv", artifact.name)).display()
        );
    }
    Ok(())
}
