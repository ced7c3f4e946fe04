use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use cascade_core::toy1d::Strategy;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod verify;

use commands::{AnalysisOverrides, Verdict};

/// Periodic Navier-Stokes runs with physical-scale cascade diagnostics.
///
/// Exit status: 0 when every asserted invariant held, 2 when some theorem
/// hypothesis was not met, 1 on an invariant violation or an error.
#[derive(Parser)]
#[command(name = "cascade-scope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver and write snapshots, the scalar series and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Budgets, coverings, invariants and theorem records of a stored run.
    Analyze {
        #[arg(long)]
        run: PathBuf,
        /// Covering radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        /// Coverings per scale (lattice plus jittered replicas).
        #[arg(long)]
        coverings: Option<usize>,
        /// Theorem identifiers among 1,2,3,4,6.
        #[arg(long, value_delimiter = ',')]
        theorems: Option<Vec<u32>>,
    },
    /// Simulate and analyze one run per Grashof number, then fit the scaling.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        gr: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Saturation constant for the fit; the smallest measured value by default.
        #[arg(long)]
        k: Option<f64>,
    },
    /// Averages of `M (1/2 + sin(N x))` over 1D coverings, as CSV.
    Toy1d {
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
        #[arg(long = "N", default_value_t = 100)]
        n: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        scales: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<Strategy>>,
    },
    /// Self-checks of one numerical component.
    Verify {
        #[arg(long, value_enum)]
        component: verify::Component,
    },
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Simulate { config, out } => commands::simulate(&config, &out),
        Command::Analyze {
            run,
            scales,
            coverings,
            theorems,
        } => commands::analyze_run(
            &run,
            &AnalysisOverrides {
                scales,
                coverings,
                theorems,
            },
        ),
        Command::Sweep { config, gr, out, k } => commands::sweep(&config, &gr, &out, k),
        Command::Toy1d {
            m,
            n,
            scales,
            strategies,
        } => {
            let strategies = strategies.unwrap_or_else(|| Strategy::ALL.to_vec());
            print!("{}", commands::toy1d(m, n, &scales, &strategies)?);
            Ok(Verdict::Ok)
        }
        Command::Verify { component } => {
            let checks = verify::run(component)?;
            let mut verdict = Verdict::Ok;
            for c in &checks {
                let tag = if c.pass() { "ok  " } else { "FAIL" };
                println!("{tag} {}: {:.3e} (limit {:.1e})", c.name, c.value, c.limit);
                if !c.pass() {
                    verdict = Verdict::InvariantViolated;
                }
            }
            Ok(verdict)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => ExitCode::from(v.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
