use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod grid;

use config::{ConfigFile, Settings};

/// Environment variable overriding the Monte Carlo work budget.
pub const WORK_BUDGET_ENV: &str = "CLONEBOOST_WORK_BUDGET";

#[derive(Parser)]
#[command(name = "cloneboost", version, about = "Simulate and verify cloning-based boosting of SAT")]
struct Cli {
    /// Experiment config (`key = value` lines, optional `[command]` sections)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a DIMACS formula with the boosting circuit and report d_N
    Solve(SolveArgs),
    /// Sweep the error bounds over a grid of (n, N, eps)
    Bounds(BoundsArgs),
    /// Monte Carlo simulation of the circuit with classical bits
    Sample(SampleArgs),
    /// Check that unitary steps with a fixed point never amplify
    Nogo(NogoArgs),
    /// Gate counts, depths and time model of the circuit
    Resources(ResourcesArgs),
}

#[derive(clap::Args)]
pub struct SolveArgs {
    /// DIMACS CNF file
    pub formula: Option<PathBuf>,
    /// Boost stages N (default: n + 6)
    #[arg(short = 'N', long)]
    pub level: Option<u32>,
    /// Maximum gate fan-in K
    #[arg(short = 'K', long)]
    pub fan_in: Option<usize>,
    /// exact, plus:EPS, minus:EPS, uniform:EPS:SEED, worst-max:EPS, worst-min:EPS
    #[arg(long)]
    pub noise: Option<String>,
    /// Largest variable count the exhaustive counter accepts
    #[arg(long)]
    pub count_cap: Option<u32>,
    #[command(flatten)]
    pub times: TimeArgs,
}

#[derive(clap::Args)]
pub struct TimeArgs {
    /// Time to create one random source bit
    #[arg(long)]
    pub t_q: Option<f64>,
    /// Time per gate layer
    #[arg(long)]
    pub t_k: Option<f64>,
    /// Time per clone
    #[arg(long)]
    pub t_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(clap::Args)]
pub struct BoundsArgs {
    /// Variable counts, e.g. `7-24` or `7,9,11`
    #[arg(long)]
    pub n: Option<String>,
    /// Extra stages N - n, e.g. `0-40`
    #[arg(long)]
    pub offsets: Option<String>,
    /// Approximation degrees, e.g. `0,1e-3,2^-(n+6)`
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Tree,
    Flat,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Mode as ValueEnum>::from_str(s, true)
    }
}

#[derive(clap::Args)]
pub struct SampleArgs {
    /// DIMACS CNF file
    pub formula: Option<PathBuf>,
    #[arg(short = 'N', long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Maximum 2^N x trials D_0 evaluations
    #[arg(long)]
    pub budget: Option<u128>,
    /// Permit N above 20
    #[arg(long)]
    pub allow_high_level: bool,
}

#[derive(clap::Args)]
pub struct NogoArgs {
    /// Hidden-register sizes, e.g. `1-3`
    #[arg(long)]
    pub h: Option<String>,
    /// Fixed-point instances per h
    #[arg(long)]
    pub trials: Option<usize>,
    /// Unconstrained control instances per h
    #[arg(long)]
    pub control_trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub h_cap: Option<u32>,
    #[arg(long)]
    pub monotone_tol: Option<f64>,
    #[arg(long)]
    pub identity_tol: Option<f64>,
}

#[derive(clap::Args)]
pub struct ResourcesArgs {
    /// DIMACS CNF file
    pub formula: Option<PathBuf>,
    #[arg(short = 'N', long)]
    pub level: Option<u32>,
    #[arg(short = 'K', long)]
    pub fan_in: Option<usize>,
    #[command(flatten)]
    pub times: TimeArgs,
    /// Include the full gate list
    #[arg(long)]
    pub circuit: bool,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    /// Negative verdict (presumed unsatisfiable).
    Negative = 1,
    Error = 2,
    /// A bound or monotonicity check failed.
    Violation = 3,
}

/// Rendered report plus the status to exit with.
pub struct Report {
    pub body: String,
    pub status: Status,
}

impl Report {
    pub fn json<T: serde::Serialize>(value: &T, status: Status) -> Result<Self> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        Ok(Report { body, status })
    }
}

fn emit(report: &Report, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, &report.body)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report.body.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Status> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let settings = |name: &str| -> Settings { file.settings(name) };
    let report = match &cli.command {
        Command::Solve(args) => commands::solve::run(args, &settings("solve"))?,
        Command::Bounds(args) => commands::bounds::run(args, &settings("bounds"))?,
        Command::Sample(args) => commands::sample::run(args, &settings("sample"))?,
        Command::Nogo(args) => commands::nogo::run(args, &settings("nogo"))?,
        Command::Resources(args) => commands::resources::run(args, &settings("resources"))?,
    };
    emit(&report, cli.output.as_deref())?;
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
