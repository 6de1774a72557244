//! Command-line front end of the HCSNet simulator.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hcsnet_core::topology::generate_layout;
use hcsnet_sim::output::{self, SWEEP_CSV};
use hcsnet_sim::{parse_config, plot, run_scenario, run_sweep, ScenarioConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "hcsnet-sim", version, about = "HCSNet CoMP clustering and handover simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV artifacts and plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep one parameter over a list of values with replications.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted parameter key, e.g. mobility.mean_session_s.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render the SVG plots from the CSVs in a results directory.
    Plot {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Write the generated RRH layout as CSV (to stdout without --out).
    DumpLayout {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a configuration, printing the resolved values.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let mut cfg = load(&config)?;
            if let Some(seed) = seed {
                cfg.sim.seed = seed;
            }
            let result = run_scenario(&cfg)?;
            output::write_run(&out, &result)?;
            plot::render_dir(&out)?;
            println!("wrote results to {}", out.display());
        }
        Command::Sweep {
            config,
            param,
            values,
            reps,
            out,
        } => {
            let cfg = load(&config)?;
            let spec = SweepSpec {
                param,
                values,
                replications: reps,
            };
            let rows = run_sweep(&cfg, &spec)?;
            let table = output::sweep_table(&spec.param, &rows);
            output::write_tables(&out, &[(SWEEP_CSV, &table)])?;
            plot::render_dir(&out)?;
            println!("wrote sweep to {}", out.display());
        }
        Command::Plot { dir } => {
            for path in plot::render_dir(&dir)? {
                println!("{}", path.display());
            }
        }
        Command::DumpLayout { config, out } => {
            let cfg = load(&config)?;
            let csv = generate_layout(&cfg.layout, cfg.sim.seed)?.to_csv();
            match out {
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        output::ensure_dir(parent)?;
                    }
                    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
                }
                None => print!("{csv}"),
            }
        }
        Command::ValidateConfig { config } => {
            let cfg = load(&config)?;
            print!("{}", cfg.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
