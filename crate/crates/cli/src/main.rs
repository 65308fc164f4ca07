//! `nemflow`: simulation and verification front end.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;

#[derive(Parser, Debug)]
#[command(name = "nemflow", version, about = "Liquid-crystal flow solver with energy diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: small-data, energy-balance or equilibrium.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Override a configuration key, e.g. `--set time.dt=5e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a simulation and write the CSV ledger, snapshots and summary.json.
    Simulate(ConfigArgs),
    /// Check the analytic derivatives of the elastic density against finite differences.
    VerifyGradients {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a trajectory and report the energy balance residual and Lyapunov verdicts.
    VerifyEnergy {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Also fail when a Lyapunov functional increases.
        #[arg(long)]
        require_lyapunov: bool,
    },
    /// Compare the smallness quantity of the initial data with its rescaling.
    ScalingTest {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 2)]
        lambda: usize,
        /// Largest accepted relative discrepancy.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
    },
    /// Summarize an existing CSV ledger, optionally plotting it to SVG.
    Report {
        csv: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(msg) = commands::check_threads() {
        eprintln!("error: {msg:#}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Simulate(cfg) => commands::simulate(&cfg),
        Command::VerifyGradients { cfg, samples, seed } => commands::verify_gradients(&cfg, samples, seed),
        Command::VerifyEnergy { cfg, require_lyapunov } => commands::verify_energy(&cfg, require_lyapunov),
        Command::ScalingTest { cfg, lambda, tol } => commands::scaling(&cfg, lambda, tol),
        Command::Report { csv, plot } => report::run(&csv, plot.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => {
                // skip causes already spelled out by the layer above
                let mut shown = String::new();
                for cause in e.chain() {
                    let text = cause.to_string();
                    if shown.contains(&text) {
                        continue;
                    }
                    if !shown.is_empty() {
                        shown.push_str(": ");
                    }
                    shown.push_str(&text);
                }
                f.write_str(&shown)
            }
            Failure::Verdict(m) => write!(f, "verdict failed: {m}"),
        }
    }
}
