mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

// an alias keeps clap from treating the parsed list as repeated values
type Seeds = Vec<u64>;

#[derive(Parser, Debug)]
#[command(name = "fourier-head", version, about = "Fourier head experiments: toy training, sweeps and smoothness checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Artifact directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON file whose keys override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// Samples per generated dataset.
    #[arg(long, default_value_t = 5000)]
    pub dataset_size: usize,
    /// Seed of the generated datasets.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one head on one dataset for one or more seeds.
    TrainToy {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainFlags,
        #[arg(long, default_value = "gaussian")]
        dataset: String,
        #[arg(long, default_value = "fourier")]
        head: String,
        /// Fourier frequencies N.
        #[arg(long, default_value_t = 12)]
        frequencies: usize,
        /// Fourier regularization strength.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// cross_entropy, mle or mse; defaults by head.
        #[arg(long)]
        objective: Option<String>,
        /// Fix the GMM mixture weights at 1/2.
        #[arg(long)]
        fixed_gmm_weights: bool,
        /// A seed, an inclusive range `0..3` or a list `0,1,2`.
        #[arg(long, default_value = "0", value_parser = config::parse_seeds)]
        seed: Seeds,
    },
    /// Sweep datasets, heads, frequencies, gammas and seeds.
    Sweep(SweepArgs),
    /// Density-estimation sweep of the Fourier and GMM heads.
    MleSweep(SweepArgs),
    /// Square-wave and colored-noise checks of the smoothness metric.
    ValidateSmoothness {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        max_harmonics: usize,
    },
    /// Evaluate a serialized Fourier density on a grid.
    DensityEval {
        #[command(flatten)]
        common: Common,
        /// JSON file `{N, coeffs: [[re, im], ...], normalized}`.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Also discretize over this many uniform bins.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Build a uniform or mixed-precision bin layout.
    BinsBuild {
        #[command(flatten)]
        common: Common,
        /// uniform or mixed_precision.
        #[arg(long, default_value = "uniform")]
        strategy: String,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        hi: f64,
        /// Fraction of bins outside the dense range (mixed precision).
        #[arg(long, default_value_t = 0.5)]
        d: f64,
        /// Single-column CSV of samples (mixed precision).
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Smoothness of a histogram read from a single-column CSV.
    Smoothness {
        /// Single-column CSV; `-` reads standard input.
        #[arg(long)]
        input: Option<PathBuf>,
        /// l2 or l1.
        #[arg(long, default_value = "l2")]
        discrepancy: String,
        #[arg(long, default_value_t = 1000)]
        sigma_max: usize,
        /// Write smoothness.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    train: TrainFlags,
    /// Comma-separated subset of gaussian,gmm2,beta.
    #[arg(long)]
    datasets: Option<String>,
    /// Comma-separated subset of linear,fourier,gmm,regression.
    #[arg(long)]
    heads: Option<String>,
    /// Comma-separated frequencies.
    #[arg(long)]
    frequencies: Option<String>,
    /// Comma-separated gammas.
    #[arg(long)]
    gammas: Option<String>,
    /// Seeds as a range `0..3` or a list.
    #[arg(long, alias = "seed", value_parser = config::parse_seeds)]
    seeds: Option<Seeds>,
    #[arg(long)]
    fixed_gmm_weights: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::TrainToy { common, train, dataset, head, frequencies, gamma, objective, fixed_gmm_weights, seed } => {
            commands::train_toy(&common, &train, &dataset, &head, frequencies, gamma, objective.as_deref(), fixed_gmm_weights, seed)
        }
        Command::Sweep(args) => commands::sweep(&args, false),
        Command::MleSweep(args) => commands::sweep(&args, true),
        Command::ValidateSmoothness { common, seed, trials, max_harmonics } => {
            commands::validate_smoothness(&common, seed, trials, max_harmonics)
        }
        Command::DensityEval { common, density, points, bins } => commands::density_eval(&common, density, points, bins),
        Command::BinsBuild { common, strategy, bins, lo, hi, d, samples } => {
            commands::bins_build(&common, &strategy, bins, lo, hi, d, samples)
        }
        Command::Smoothness { input, discrepancy, sigma_max, out, config } => {
            commands::smoothness(input, &discrepancy, sigma_max, out, config)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
