//! The `eil` command-line front end.
//!
//! Subcommands: `construct`, `verify`, `montecarlo` and `sweep`. Exit codes:
//! 0 success, 1 invalid parameters, 2 a check in the report failed, 3 an I/O
//! or parse error.

pub mod commands;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eil_core::report::StatsReport;
use eil_core::subgraph::BitGraph;
use thiserror::Error;

pub use commands::{
    construct_furedi, construct_incidence, montecarlo, sweep, verify_graph, with_workers,
    FurediConfig, IncidenceConfig, MonteCarloConfig, SweepConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid parameters: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Parse(_) | CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "eil",
    version,
    about = "Build and check K_{2,t+1}-free graphs with many K_{t,t}"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and write it with sidecars and a report.
    Construct(ConstructArgs),
    /// Check a graph file for K_{s,m}.
    Verify(VerifyArgs),
    /// Compare evasive-set line statistics with their exact values.
    Montecarlo(MonteCarloArgs),
    /// Count K_{t,t} copies of incidence graphs over several q.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Incidence,
    Furedi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Report encoding.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads.
    #[arg(long, env = "EIL_WORKERS")]
    pub workers: Option<usize>,
    /// Record wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub q: u32,
    #[arg(long, default_value_t = 3)]
    pub t: u32,
    /// Seed for X (incidence only).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for Y; derived from --seed when omitted.
    #[arg(long)]
    pub seed_y: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "eil-out")]
    pub out: PathBuf,
    /// Lift the size guard on 3-subset scans.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub force: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long, default_value_t = 3)]
    pub t: u32,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<u32>,
    #[arg(long, default_value_t = 3)]
    pub t: u32,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            for c in &report.checks {
                match &c.witness {
                    None => eprintln!("check {}: pass", c.name),
                    Some(w) => eprintln!("check {}: FAIL ({w})", c.name),
                }
            }
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn workers(o: &Output) -> Result<usize, CliError> {
    match o.workers {
        Some(0) => Err(CliError::Validation("workers must be at least 1".into())),
        Some(w) => Ok(w),
        None => Ok(default_workers()),
    }
}

fn encode(report: &StatsReport, format: Format) -> Result<String, CliError> {
    let r = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    r.map_err(|e| CliError::Io(e.to_string()))
}

fn report_name(format: Format) -> &'static str {
    match format {
        Format::Json => "report.json",
        Format::Csv => "report.csv",
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Writes the report into `dir`, or to stdout when there is no directory.
fn emit(report: &StatsReport, o: &Output, dir: Option<&Path>) -> Result<(), CliError> {
    let text = encode(report, o.format)?;
    match dir {
        Some(d) => {
            create_dir(d)?;
            write_file(d, report_name(o.format), &text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stamp(report: &mut StatsReport, o: &Output, start: Instant) {
    if o.timing {
        report.wall_clock_ms = Some(start.elapsed().as_millis() as u64);
    }
}

pub fn execute(command: Command) -> Result<StatsReport, CliError> {
    let start = Instant::now();
    match command {
        Command::Construct(a) => {
            let w = workers(&a.output)?;
            let (files, mut report) = match a.kind {
                Kind::Incidence => {
                    let cfg = IncidenceConfig {
                        q: a.q,
                        t: a.t,
                        seed: a.seed,
                        seed_y: a.seed_y,
                    };
                    with_workers(w, || construct_incidence(&cfg))??
                }
                Kind::Furedi => {
                    let cfg = FurediConfig {
                        q: a.q,
                        t: a.t,
                        force: a.force,
                    };
                    with_workers(w, || construct_furedi(&cfg))??
                }
            };
            stamp(&mut report, &a.output, start);
            create_dir(&a.out)?;
            for (name, contents) in &files {
                write_file(&a.out, name, contents)?;
            }
            emit(&report, &a.output, Some(&a.out))?;
            Ok(report)
        }
        Command::Verify(a) => {
            let w = workers(&a.output)?;
            let text = fs::read_to_string(&a.graph)
                .map_err(|e| CliError::Io(format!("{}: {e}", a.graph.display())))?;
            let g = BitGraph::parse(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", a.graph.display())))?;
            let mut report = with_workers(w, || verify_graph(&g, a.s, a.m, a.force))??;
            stamp(&mut report, &a.output, start);
            emit(&report, &a.output, a.out.as_deref())?;
            Ok(report)
        }
        Command::Montecarlo(a) => {
            let w = workers(&a.output)?;
            let cfg = MonteCarloConfig {
                q: a.q,
                t: a.t,
                trials: a.trials,
                seed: a.seed,
            };
            let mut report = with_workers(w, || montecarlo(&cfg))??;
            stamp(&mut report, &a.output, start);
            emit(&report, &a.output, a.out.as_deref())?;
            Ok(report)
        }
        Command::Sweep(a) => {
            let w = workers(&a.output)?;
            let cfg = SweepConfig {
                qs: a.q.clone(),
                t: a.t,
                trials: a.trials,
                seed: a.seed,
            };
            let (mut report, table) = with_workers(w, || sweep(&cfg))??;
            stamp(&mut report, &a.output, start);
            emit(&report, &a.output, a.out.as_deref())?;
            if let Some(d) = &a.out {
                write_file(d, "sweep.csv", &table)?;
            }
            Ok(report)
        }
    }
}
