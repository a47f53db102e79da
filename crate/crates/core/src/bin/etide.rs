//! Command-line experiment runner.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use etide::benchfn;
use etide::harness::{self, ExperimentConfig, RunRecord};

#[derive(Parser)]
#[command(
    name = "etide",
    version,
    about = "Differential evolution with event-triggered impulsive control: \
             benchmark suite, experiment runner, and comparison tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment described by a JSON config file.
    Run {
        /// Experiment configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory for records and tables.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the benchmark-suite manifest as JSON.
    Suite {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        dim: usize,
    },
    /// Recompute the comparison tables from stored run records.
    Compare {
        /// Directory containing records/*.jsonl (or the records dir itself).
        #[arg(long)]
        records: PathBuf,
        /// Where to write the tables; defaults to the records' parent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump one run's convergence curve as `fes,error` lines.
    Trace {
        /// A records/*.jsonl file.
        #[arg(long)]
        record: PathBuf,
        /// Which line (run) of the file to dump.
        #[arg(long, default_value_t = 0)]
        line: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(etide::Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Print to stdout, reporting closed pipes as an error instead of panicking.
fn emit(text: std::fmt::Arguments<'_>) -> etide::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    out.write_fmt(text)?;
    Ok(())
}

fn run(cli: Cli) -> etide::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            jobs,
            out,
        } => {
            let text = fs::read_to_string(&config)?;
            let mut config: ExperimentConfig = serde_json::from_str(&text)?;
            if let Some(seed) = seed {
                config.master_seed = seed;
            }
            let output = harness::run_experiment(&config, jobs, &out)?;
            println!(
                "{} runs completed, {} failed; tables written to {}",
                output.records.len(),
                output.failures.len(),
                out.display()
            );
            Ok(())
        }
        Command::Suite { seed, dim } => {
            let suite = benchfn::make_suite(seed, dim)?;
            let manifest = benchfn::manifest(seed, &suite);
            emit(format_args!("{}\n", serde_json::to_string_pretty(&manifest)?))
        }
        Command::Compare { records, out } => {
            let records_dir = if records.join("records").is_dir() {
                records.join("records")
            } else {
                records.clone()
            };
            let loaded = harness::load_records(&records_dir)?;
            if loaded.is_empty() {
                return Err(etide::Error::InvalidConfig(format!(
                    "no run records found under {}",
                    records_dir.display()
                )));
            }
            let out = out.unwrap_or_else(|| {
                records_dir
                    .parent()
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from("."))
            });
            harness::write_reports(&loaded, &out)?;
            println!(
                "recomputed tables from {} records into {}",
                loaded.len(),
                out.display()
            );
            Ok(())
        }
        Command::Trace { record, line } => {
            let text = fs::read_to_string(&record)?;
            let chosen = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .nth(line)
                .ok_or_else(|| {
                    etide::Error::InvalidConfig(format!(
                        "{} has no record at line {line}",
                        record.display()
                    ))
                })?;
            let run: RunRecord = serde_json::from_str(chosen)?;
            emit(format_args!("fes,error\n"))?;
            for p in &run.curve {
                emit(format_args!("{},{:e}\n", p.fes, p.error))?;
            }
            Ok(())
        }
    }
}
