//! `phk`: verification suites for split-quaternionic geometry on
//! four-dimensional charts.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed,
//! 2 configuration or usage error.

mod config;
mod pretty;
mod suites;

use clap::{Parser, Subcommand};
use config::{Overrides, SuiteConfig, SUITES};
use parahyper::VerificationReport;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phk",
    version,
    about = "Verification suites for para-hypercomplex geometry on four-dimensional charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and print its JSON report.
    Verify {
        /// Suite name: walker-pc, walker-hk, inoue-splus, inoue-sminus,
        /// kamada-torus, kamada-kodaira, algebra or custom.
        suite: String,
        /// JSON configuration file; omit to run with suite defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the tolerance of every residual (max <= tol) check.
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-emit a stored report, optionally as an aligned table.
    Report {
        /// Render a human-readable table instead of JSON.
        #[arg(long)]
        pretty: bool,
        /// Path of a report JSON file.
        path: PathBuf,
    },
}

fn verify(
    suite: &str,
    config: Option<PathBuf>,
    over: Overrides,
    out: Option<PathBuf>,
) -> Result<bool, String> {
    let text = match config {
        None => "{\"schema\":1}".to_string(),
        Some(path) => std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?,
    };
    let cfg = SuiteConfig::resolve(suite, &text, over).map_err(|e| e.to_string())?;
    let report = suites::run_suite(&cfg).map_err(|e| e.to_string())?;
    let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
    println!("{json}");
    if let Some(path) = out {
        std::fs::write(&path, format!("{json}\n"))
            .map_err(|e| format!("cannot write report {}: {e}", path.display()))?;
    }
    Ok(report.pass)
}

fn show_report(pretty: bool, path: PathBuf) -> Result<(), String> {
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read report {}: {e}", path.display()))?;
    let report: VerificationReport = serde_json::from_str(&text)
        .map_err(|e| format!("{} is not a schema-1 report: {e}", path.display()))?;
    if report.schema != 1 {
        return Err(format!(
            "{} has report schema {}; this build reads schema 1",
            path.display(),
            report.schema
        ));
    }
    if pretty {
        print!("{}", pretty::render(&report));
    } else {
        println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify {
            suite,
            config,
            samples,
            seed,
            tol,
            out,
        } => {
            let over = Overrides { samples, seed, tol };
            match verify(&suite, config, over, out) {
                Ok(true) => ExitCode::from(0),
                Ok(false) => ExitCode::from(1),
                Err(message) => {
                    eprintln!("error: {message}");
                    if !SUITES.contains(&suite.as_str()) {
                        eprintln!("suites: {}", SUITES.join(", "));
                    }
                    ExitCode::from(2)
                }
            }
        }
        Command::Report { pretty, path } => match show_report(pretty, path) {
            Ok(()) => ExitCode::from(0),
            Err(message) => {
                eprintln!("error: {message}");
                ExitCode::from(2)
            }
        },
    }
}
