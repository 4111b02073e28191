use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rank_disparity::inference::{InferenceMethod, DEFAULT_LEVEL};
use rank_disparity::io::OutputFormat;
use rank_disparity::resampling::{IntervalKind, DEFAULT_REPLICATES};
use rank_disparity::{Aversion, DisparityError, IndexKind, Reference};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "rank-disparity",
    version,
    about = "Rank-dependent health-disparity indices",
    args_conflicts_with_subcommands = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate indices on grouped data, one row per (dataset, kind, nu, alpha).
    Compute(ComputeArgs),
    /// Evaluate indices over an alpha grid for plotting.
    Sweep(SweepArgs),
    /// Standard errors, intervals, null tests and comparisons.
    Infer(InferArgs),
    /// Generate survey microdata matching grouped margins.
    Synth(SynthArgs),
    /// List the embedded reference tables or print one as CSV.
    Fixtures(FixturesArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Input CSV file; repeat for several datasets.
    #[arg(long = "data", value_name = "PATH")]
    data: Vec<PathBuf>,
    /// Embedded table name, or a name prefix selecting several.
    #[arg(long = "fixture", value_name = "NAME", value_delimiter = ',')]
    fixture: Vec<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long = "index", value_delimiter = ',', default_value = "ri")]
    kinds: Vec<IndexKind>,
    /// Comma-separated; `inf` selects the closed-form limit.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    alpha: Vec<Aversion>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    nu: Vec<Aversion>,
    #[arg(long, default_value = "population-mean")]
    reference: Reference,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long = "index", value_delimiter = ',', default_value = "ri,ge-std,concentration")]
    kinds: Vec<IndexKind>,
    /// Grid as `lo:hi:step`.
    #[arg(long, default_value = "0:8:0.25", conflicts_with = "alpha")]
    alpha_grid: String,
    /// Explicit alpha list instead of a grid.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<Aversion>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    nu: Vec<Aversion>,
    #[arg(long, default_value = "population-mean")]
    reference: Reference,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct InferArgs {
    #[command(flatten)]
    input: InputArgs,
    /// linearization and bootstrap read survey microdata; delta and
    /// null-simulation read grouped tables with SEs or age-stratified rates.
    #[arg(long, default_value = "delta")]
    method: InferenceMethod,
    /// Also run the Poisson simulation test of no gradient.
    #[arg(long)]
    null_test: bool,
    /// Test differences between every pair of inputs.
    #[arg(long)]
    compare: bool,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    alpha: Vec<Aversion>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    nu: Vec<Aversion>,
    #[arg(long, default_value = "population-mean")]
    reference: Reference,
    /// Replicates for the bootstrap and the null simulation.
    #[arg(long = "B", default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, env = "RANK_DISPARITY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, default_value = "percentile")]
    interval: IntervalKind,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    strata: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long = "obs")]
    obs_per_cluster: Option<usize>,
    #[arg(long)]
    stratum_sd: Option<f64>,
    #[arg(long)]
    cluster_sd: Option<f64>,
    /// Keep the raw design weights instead of matching the margins exactly.
    #[arg(long)]
    no_calibrate: bool,
    #[arg(long, env = "RANK_DISPARITY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixturesArgs {
    /// Print this table instead of the list.
    name: Option<String>,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

fn exit_code(err: &DisparityError) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Infer(a) => commands::infer(a),
        Command::Synth(a) => commands::synth(a),
        Command::Fixtures(a) => commands::fixtures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
