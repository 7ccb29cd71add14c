//! `heavyqf` command-line entry point.
//!
//! Every run prints one JSON document on stdout with the keys `command`,
//! `config` (the fully resolved parameters, seed included) and `results`.
//! Tabular data goes to `--out` as CSV. Exit codes: 0 on success, 2 on a
//! configuration error, 1 on a numerical failure or a failed invariant.

mod commands;
mod output;
pub mod parse;
mod selftest;

use clap::{Args, Parser, Subcommand};
use heavyqf_core::Error as CoreError;
use std::io::Write;

pub use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(CoreError),
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::NoConvergence(_)
                | CoreError::Numerical(_)
                | CoreError::NotSymmetric(_)
                | CoreError::ZeroVector
                | CoreError::ZeroRow(_) => 1,
                _ => 2,
            },
            CliError::Invariant(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "heavyqf", version, about = "Quadratic forms in self-normalized heavy-tailed vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct LawArgs {
    /// Mixing measure nu, e.g. `twopoint`, `exponential(1)` or a JSON object.
    #[arg(long, default_value = "twopoint")]
    pub nu: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Evaluation grid `a:b:count`.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Entry distribution of X, e.g. `pareto(1)` or `slowly_varying`.
    #[arg(long)]
    pub xi: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Aspect ratio p/n, used when `--p` is absent.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density of the limit law on a grid.
    LawDensity(LawArgs),
    /// CDF of the limit law on a grid.
    LawCdf(LawArgs),
    /// Moments of orders 1..=max-order.
    LawMoments {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, default_value_t = 6)]
        max_order: usize,
    },
    /// Stieltjes transform at `--z re,im` points or along `x + i eta` for x on `--grid`.
    LawStieltjes {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, allow_hyphen_values = true)]
        z: Vec<String>,
        #[arg(long, default_value_t = 1e-3)]
        eta: f64,
    },
    /// Atom probe `lim (a - z) s(z)` at each grid point.
    LawAtoms {
        #[command(flatten)]
        law: LawArgs,
        /// Comma-separated imaginary parts, decreasing.
        #[arg(long)]
        v_seq: Option<String>,
    },
    /// Density against its large-x asymptote.
    LawTail(LawArgs),
    /// Monte Carlo law of Q_n(y, A).
    SimulateQf {
        #[arg(long, default_value = "pareto(1)")]
        xi: String,
        #[arg(long, default_value = "twopoint")]
        nu: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// `grid` (quantile grid of nu) or `iid` (draws from nu).
        #[arg(long, default_value = "grid")]
        diag: String,
        /// `zero` or `gaussian`.
        #[arg(long, default_value = "zero")]
        offdiag: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Second moment of the off-diagonal part along an n grid.
    SimulateOffdiag {
        #[arg(long, default_value = "pareto(1)")]
        xi: String,
        #[arg(long, default_value = "gaussian")]
        offdiag: String,
        #[arg(long, default_value = "100,400,1600")]
        n_grid: String,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Unbounded diagonal: truncation functional and KS against the limit law.
    SimulateTrunc {
        #[arg(long, default_value = "pareto(1)")]
        xi: String,
        #[arg(long, default_value = "exponential(1)")]
        nu: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value = "1,3,10,30")]
        t_grid: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Empirical spectral distribution of the sample correlation matrix.
    SimulateEsd {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long)]
        eigenvalues_out: Option<String>,
    },
    /// Both sides of the heavy-tailed Marchenko-Pastur embedding.
    SimulateEmbed {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "-1,0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
    },
    /// Occupancy construction for slowly varying tails.
    SimulateAlpha0 {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 6)]
        max_k: usize,
    },
    /// Hanson-Wright tail shape for sub-Gaussian entries.
    CheckHw {
        #[arg(long, default_value = "gaussian")]
        xi: String,
        #[arg(long, default_value = "uniform")]
        nu: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value = "gaussian")]
        offdiag: String,
        #[arg(long)]
        t_grid: Option<String>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Azuma concentration of resolvent-diagonal statistics across seeds.
    CheckResolventConc {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        z: f64,
        /// `re`, `im` or `abs`.
        #[arg(long, default_value = "re")]
        f: String,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long, default_value = "0.002,0.005,0.01,0.02,0.05")]
        t_grid: String,
    },
    /// Variance of the diagonal part for light-tailed entries along an n grid.
    CheckLighttail {
        #[arg(long, default_value = "gaussian")]
        xi: String,
        #[arg(long, default_value = "twopoint")]
        nu: String,
        #[arg(long, default_value = "100,400,1600")]
        n_grid: String,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Built-in example suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LawDensity(_) => "law-density",
            Command::LawCdf(_) => "law-cdf",
            Command::LawMoments { .. } => "law-moments",
            Command::LawStieltjes { .. } => "law-stieltjes",
            Command::LawAtoms { .. } => "law-atoms",
            Command::LawTail(_) => "law-tail",
            Command::SimulateQf { .. } => "simulate-qf",
            Command::SimulateOffdiag { .. } => "simulate-offdiag",
            Command::SimulateTrunc { .. } => "simulate-trunc",
            Command::SimulateEsd { .. } => "simulate-esd",
            Command::SimulateEmbed { .. } => "simulate-embed",
            Command::SimulateAlpha0 { .. } => "simulate-alpha0",
            Command::CheckHw { .. } => "check-hw",
            Command::CheckResolventConc { .. } => "check-resolvent-conc",
            Command::CheckLighttail { .. } => "check-lighttail",
            Command::Selftest { .. } => "selftest",
        }
    }
}

/// Reads `HEAVYQF_THREADS`; unset or empty means the default pool.
fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("HEAVYQF_THREADS") {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(CliError::Config(format!("HEAVYQF_THREADS must be a positive integer, got {s:?}"))),
        },
    }
}

/// Parses `args` (program name first) and runs the command, writing the JSON
/// document to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    2
                }
            };
        }
    };
    let outcome = thread_cap().and_then(|cap| match cap {
        None => commands::execute(&cli.command),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| commands::execute(&cli.command)),
    });
    match outcome {
        Ok(report) => {
            let doc = report.document(cli.command.name());
            if let Err(e) = writeln!(stdout, "{doc}") {
                let _ = writeln!(stderr, "error: {e}");
                return 1;
            }
            if let Some(name) = report.failed_invariant() {
                let _ = writeln!(stderr, "invariant failed: {name}");
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
