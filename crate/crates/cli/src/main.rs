mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "hsplus", version, about = "Horseshoe and horseshoe+ shrinkage for sparse normal means")]
pub struct Cli {
    /// `key = value` file supplying defaults for any long flag.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Master seed, or `random` to draw one from the OS.
    #[arg(long)]
    pub seed: Option<String>,
    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate a prior density on a grid.
    Density(DensityArgs),
    /// Run the Gibbs sampler on observations.
    Fit(FitArgs),
    /// Apply a decision rule to a fitted summary.
    Test(TestArgs),
    /// Estimation-error simulation over sparse means.
    SimSse(SimSseArgs),
    /// Misclassification simulation over the two-groups model.
    SimMp(SimMpArgs),
    /// Run numerical invariant suites.
    Verify(VerifyArgs),
    /// Convert t-statistics to z-scores and optionally fit them.
    Ingest(IngestArgs),
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long, default_value = "hs+")]
    pub family: String,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// LO:HI:STEP
    #[arg(long)]
    pub grid: Option<String>,
    /// theta, lambda or kappa.
    #[arg(long, default_value = "theta")]
    pub scale: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// CSV with a `y` column and optional `truth` column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "hs+")]
    pub family: String,
    /// fixed:R, half-cauchy:S or uniform.
    #[arg(long, default_value = "half-cauchy:1")]
    pub tau_policy: String,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 5_000)]
    pub burn: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    /// Per-coordinate summary CSV; stdout when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Retained draws, one row per draw: theta_1..theta_n,tau.
    #[arg(long)]
    pub posterior: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    /// Summary CSV written by `fit`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// half (ω̂ > ½) or bh (Benjamini–Hochberg on y).
    #[arg(long, default_value = "half")]
    pub rule: String,
    /// BH level; defaults to 1/log n.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimSseArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Comma-separated signal fractions.
    #[arg(long, default_value = "0.05,0.1,0.2,0.3")]
    pub q: String,
    /// Comma-separated signal magnitudes.
    #[arg(long, default_value = "7,8")]
    pub a: String,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    /// Comma-separated FAMILY@POLICY entries; `1/n` is accepted as a scale.
    #[arg(long, default_value = "hs+@half-cauchy:1/n,hs@half-cauchy:1/n,hs+@half-cauchy:1,hs@half-cauchy:1")]
    pub methods: String,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 5_000)]
    pub burn: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimMpArgs {
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Comma-separated μ values; ten points in [0.01, 0.5] by default.
    #[arg(long)]
    pub mu: Option<String>,
    /// Slab scale ψ; √(2 log n) by default.
    #[arg(long)]
    pub psi: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    /// plug-in or full-bayes.
    #[arg(long, default_value = "plug-in")]
    pub mode: String,
    #[arg(long, default_value_t = 4_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// bounds, concentration, tweedie, mass, mse or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// CSV with columns id,stat[,df].
    #[arg(long)]
    pub tstats: Option<PathBuf>,
    /// Degrees of freedom for every row; overrides a df column.
    #[arg(long)]
    pub df: Option<u32>,
    /// z-score CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also fit the z-scores and write effect sizes.
    #[arg(long)]
    pub analyze: bool,
    #[arg(long, default_value = "hs+")]
    pub family: String,
    #[arg(long, default_value = "half-cauchy:1")]
    pub tau_policy: String,
    #[arg(long, default_value_t = 15_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 3_000)]
    pub burn: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long)]
    pub effects: Option<PathBuf>,
    /// Sidecar with the prediction MSE and counts.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
    /// Assertions ran and at least one failed.
    Checks,
}

impl From<hsplus::Error> for Failure {
    fn from(e: hsplus::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let root = Cli::command();
    let matches = root.clone().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    let (sub, _) = matches.subcommand().expect("subcommand is required");
    let merged = config::merge(&path, &root, sub, &matches, &argv)
        .map_err(|e| root.clone().error(clap::error::ErrorKind::ValueValidation, e.0))?;
    let matches = root.try_get_matches_from(merged)?;
    Cli::from_arg_matches(&matches)
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Checks) => ExitCode::from(1),
    }
}
