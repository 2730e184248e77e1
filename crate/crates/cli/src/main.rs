//! `qsr`: generate or ingest an automobile insurance portfolio, fit
//! frequency and severity models, apply quota-share transforms, and emit
//! VaR/CTE risk reports with bundle-pricing guidance.
//!
//! Exit codes: 0 success, 1 validation/input error, 2 numerical
//! non-convergence, 64 usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod svg;

pub use commands::CliError;

#[derive(Parser)]
#[command(name = "qsr", version, about = "Portfolio risk analytics pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the portfolio comes from: CSV files, or the seeded synthetic
/// generator when no files are given.
#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Policy CSV to ingest (requires --claims).
    #[arg(long, requires = "claims")]
    policies: Option<PathBuf>,
    /// Claims CSV to ingest (requires --policies).
    #[arg(long, requires = "policies")]
    claims: Option<PathBuf>,
    /// Seed for the synthetic portfolio and the Monte Carlo resampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Synthetic portfolio size (default 22000).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic portfolio: policies.csv, claims.csv and
    /// gen-manifest.json.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Portfolio size (default 22000).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Validate portfolio CSVs; optionally re-emit them in canonical form.
    Ingest {
        #[arg(long)]
        policies: PathBuf,
        #[arg(long)]
        claims: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the NCD claim regression for one response kind and print the
    /// predicted-mean grid (model and observed rows).
    FitFrequency {
        /// Response kind: indl, type or event.
        #[arg(long)]
        kind: String,
        /// Print the change-of-mean series instead of the level grid.
        #[arg(long)]
        changes: bool,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit per-coverage severity distributions and emit density curves.
    FitSeverity {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quota-share sweep over the comprehensive loss distribution.
    QuotaShare {
        /// Retained fractions, e.g. 0.25,0.5,0.75,1.0.
        #[arg(long, value_delimiter = ',')]
        quotas: Option<Vec<f64>>,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// VaR/CTE report for unbundled and bundled coverages.
    RiskReport {
        /// Levels in (0,1), e.g. 0.90,0.95,0.99.
        #[arg(long, value_delimiter = ',')]
        percentiles: Option<Vec<f64>>,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a bundled offer against the reference-price rules.
    BundleAdvise {
        /// Per-coverage component prices: injury,own-damage,property.
        #[arg(long, value_delimiter = ',')]
        components: Vec<f64>,
        #[arg(long)]
        bundle: f64,
        /// Reference price of a value-add component (presence of the flag
        /// marks the offer as carrying a value-add).
        #[arg(long)]
        value_add_ref: Option<f64>,
    },
    /// Run every stage and write the full artifact tree.
    Pipeline {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_delimiter = ',')]
        percentiles: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        quotas: Option<Vec<f64>>,
        /// Render static SVG charts alongside the CSV data.
        #[arg(long)]
        svg: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Err(err) = commands::run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
