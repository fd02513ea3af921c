use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use contractio::error::Error;
use contractio::exec::with_threads;
use contractio::runner;

/// Numerical laboratory for moments of contraction of quantum channels.
#[derive(Parser)]
#[command(name = "contractio", version, about)]
struct Cli {
    /// Worker threads (default: all cores; CONTRACTIO_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo parameter sweep over (param, n) cells; emits CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every applicable analytic bound for a channel; emits JSON.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noisy layered-circuit contraction study; emits CSV.
    Circuit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymptotic region labels for the Pauli channel simplex; emits CSV.
    PhaseDiagram {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Local-differential-privacy audit of a channel; emits JSON.
    Ldp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the fast invariant suite and exit nonzero on failure.
    Selftest,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Json(_) | Error::Io(_) => 2,
        Error::InvalidShape(_) | Error::DimensionMismatch(_) | Error::Domain(_) => 2,
        Error::Quadrature { .. } | Error::EigNonConvergence(_) | Error::EmptyEstimate(_) => 3,
    }
}

fn write_output(path: &PathBuf, content: &str) -> contractio::Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

fn run(cli: &Cli) -> contractio::Result<u8> {
    match &cli.command {
        Command::Sweep { config, out } => {
            let bytes = std::fs::read(config)?;
            let csv = runner::cmd_sweep(&bytes, cli.seed)?;
            write_output(out, &csv)?;
            Ok(0)
        }
        Command::Bounds { config, out } => {
            let bytes = std::fs::read(config)?;
            let doc = runner::cmd_bounds(&bytes)?;
            write_output(out, &doc)?;
            Ok(0)
        }
        Command::Circuit { config, out } => {
            let bytes = std::fs::read(config)?;
            let csv = runner::cmd_circuit(&bytes, cli.seed)?;
            write_output(out, &csv)?;
            Ok(0)
        }
        Command::PhaseDiagram { config, out } => {
            let bytes = std::fs::read(config)?;
            let csv = runner::cmd_phase_diagram(&bytes)?;
            write_output(out, &csv)?;
            Ok(0)
        }
        Command::Ldp { config, out } => {
            let bytes = std::fs::read(config)?;
            let doc = runner::cmd_ldp(&bytes, cli.seed)?;
            write_output(out, &doc)?;
            Ok(0)
        }
        Command::Selftest => {
            let results = runner::cmd_selftest(cli.seed.unwrap_or(0));
            let mut failed = 0;
            for r in &results {
                let tag = if r.pass { "PASS" } else { "FAIL" };
                println!("{tag} {name} - {detail}", name = r.name, detail = r.detail);
                if !r.pass {
                    failed += 1;
                }
            }
            println!(
                "selftest: {}/{} checks passed",
                results.len() - failed,
                results.len()
            );
            Ok(if failed == 0 { 0 } else { 4 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("CONTRACTIO_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    match with_threads(threads, || run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let payload = serde_json::json!({ "error": err.to_string() });
            eprintln!("{payload}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
