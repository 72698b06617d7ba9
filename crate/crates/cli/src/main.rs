//! `eds`: generate datasets, curate representative subsets, score them and
//! fit sparse dynamics models, with every step leaving JSON/CSV artifacts.

mod artifacts;
mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use eds_core::eds::Routing;

#[derive(Parser)]
#[command(name = "eds", version, about = "Error distribution smoothing toolkit")]
struct Cli {
    /// Increase log detail (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Echoed into every artifact as `run_config`.
#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic dataset (CSV plus JSON sidecar).
    Gen(GenArgs),
    /// Split a dataset into representative and auxiliary sets.
    Eds(EdsArgs),
    /// Complexity-to-density ratios of a tessellation.
    Metrics(MetricsArgs),
    /// Fit a sparse polynomial model and score it on a test set.
    Sindy(SindyArgs),
    /// Consolidate a run directory into one report plus plot tables.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Motivation,
    MotivationNoisy,
    Lorenz,
    Rectangles,
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub generator: Generator,
    /// Sample count (motivation, motivation-noisy, rectangles).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Label noise standard deviation (motivation-noisy).
    #[arg(long)]
    pub noise_std: Option<f64>,
    /// Number of initial conditions (lorenz).
    #[arg(long)]
    pub n_inits: Option<usize>,
    /// Trajectory length in time units (lorenz).
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Integration step (lorenz).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Image side length in pixels (rectangles).
    #[arg(long)]
    pub image_size: Option<usize>,
    /// Measure moments about the rectangle centroid (rectangles).
    #[arg(long)]
    pub centroid: bool,
    /// Output CSV; the sidecar goes next to it. Defaults to `<generator>.csv`.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoutingArg {
    HighError,
    HullOnly,
}

impl From<RoutingArg> for Routing {
    fn from(r: RoutingArg) -> Self {
        match r {
            RoutingArg::HighError => Routing::HighError,
            RoutingArg::HullOnly => Routing::HullOnly,
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct EdsArgs {
    /// Dataset CSV with raw values; it is standardized before curation.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Error threshold in standardized label units (`inf` allowed).
    #[arg(long, default_value_t = 0.05)]
    #[serde(with = "eds_core::eds::extended_f64")]
    pub psi: f64,
    #[arg(long, default_value_t = 256)]
    pub batch: usize,
    #[arg(long, default_value_t = 2.0)]
    pub z: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub max_passes: usize,
    #[arg(long, value_enum, default_value_t = RoutingArg::HighError)]
    pub routing: RoutingArg,
    #[arg(long, short)]
    pub out_dir: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct MetricsArgs {
    /// The dataset the subset refers to.
    #[arg(long, short)]
    pub input: PathBuf,
    /// An `eds_result.json`; its representative set is scored.
    #[arg(long, conflicts_with = "random_size")]
    pub subset: Option<PathBuf>,
    /// Score a uniform random subset of this size instead.
    #[arg(long)]
    pub random_size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub random_seed: u64,
    /// `analytic:<generator>` or `empirical`.
    #[arg(long, default_value = "empirical")]
    pub oracle: String,
    #[arg(long, default_value_t = eds_core::metrics::DEFAULT_PROBES)]
    pub probes: usize,
    #[arg(long, default_value_t = eds_core::metrics::DEFAULT_Z)]
    pub z: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SindyArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Dataset whose moments define the standardized units; defaults to
    /// the training set.
    #[arg(long)]
    pub standardize_on: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Simulate the fitted model from the first test state.
    #[arg(long, default_value_t = 0)]
    pub rollout_steps: usize,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Directory holding `eds_result.json` and `metrics.json`, and
    /// optionally `sindy.json`.
    pub run_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
