//! `psc`: principal Stiefel coordinates from the command line.
//!
//! Subcommands: `generate` (synthetic datasets), `fit` (run the reduction
//! pipeline), `eval` (metrics and plot-ready tables), `reproduce` (seeded
//! end-to-end experiments).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod errors;
mod files;

use errors::CmdResult;

#[derive(Parser)]
#[command(name = "psc", version, about = "Principal Stiefel coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (with truth sidecars)
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Fit an embedding and write the report and low-dimensional coordinates
    Fit(FitCmd),
    /// Evaluate fits and datasets
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run a pinned end-to-end experiment into an output directory
    #[command(subcommand)]
    Reproduce(ReproduceCmd),
}

#[derive(Subcommand)]
pub enum GenerateCmd {
    /// Uniform frames pushed through a random embedding plus Gaussian noise
    NoisyEmbed {
        #[arg(long = "N")]
        ambient_dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tent-response random walk on a stimulus circle, preprocessed to the sphere
    Stimulus {
        #[arg(long, default_value_t = 100)]
        neurons: usize,
        #[arg(long, default_value_t = 13000)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        step_std: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mobius-bundle lift of uniform circle samples into V_1(R^charts)
    Mobius {
        #[arg(long, default_value_t = 25)]
        charts: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Whitney-sum lift of torus samples into V_2(R^(2*charts^2))
    Torus {
        #[arg(long, default_value_t = 10)]
        charts: usize,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Sample along a closed (p,q)-curve instead of uniformly, e.g. `1,15`
        #[arg(long, value_parser = parse_curve)]
        curve: Option<(u32, u32)>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
pub struct FitCmd {
    /// Input dataset (psc-dataset v1)
    pub dataset: PathBuf,
    /// Target embedding dimension n (k <= n <= N)
    #[arg(long)]
    pub n: usize,
    /// Project rows to the nearest orthonormal frame on load
    #[arg(long)]
    pub renormalize: bool,
    /// Enable the subsample-and-screen outlier pass before fitting
    #[arg(long)]
    pub ransac: bool,
    #[arg(long, default_value_t = 0.99)]
    pub keep_fraction: f64,
    /// Outlier threshold in standard deviations above the mean residual
    #[arg(long, default_value_t = 3.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 50)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1.0)]
    pub initial_step: f64,
    /// Report output path (default: <dataset>.report.json)
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Low-dimensional coordinates output path (default: <dataset>.low)
    #[arg(long)]
    pub low_dim: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum EvalCmd {
    /// Print the mean squared projection residual of a fit
    Mse {
        #[arg(long)]
        report: PathBuf,
    },
    /// Frechet-variance ratio of projected to original points
    VarianceRatio {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Eigenvalues of the second-moment matrix, one per line
    Spectrum {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost over the hemisphere grid for the N=3, n=2, k=1 case
    Landscape {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 72)]
        theta_res: usize,
        #[arg(long, default_value_t = 19)]
        phi_res: usize,
        /// Fit report whose embeddings become grid markers
        #[arg(long)]
        report: Option<PathBuf>,
        /// Generating embedding (one-point dataset file) as a marker
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Align recovered circle coordinates to truth and report the MSE
    Path {
        #[arg(long)]
        low_dim: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Gaussian smoothing sigma in samples
        #[arg(long, default_value_t = 100.0)]
        sigma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chordal k-means labels, one per line
    Kmeans {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adjusted Rand index between two label files
    Ari {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum ReproduceCmd {
    /// Noisy circle on S^2: cost ordering and loss landscape
    Circle {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Variance-ratio curve over the target dimension
    Variance {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stimulus-space walk: circular coordinate recovery vs PCA
    Stimulus {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mobius bundle: paired MSE trials with a one-sided test
    Mobius {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Torus Whitney sum: per-trial MSE ordering on (1,1)- and (1,15)-curves
    Torus {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_curve(s: &str) -> Result<(u32, u32), String> {
    let (p, q) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `p,q`, got `{s}`"))?;
    let p = p.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let q = q.trim().parse::<u32>().map_err(|e| e.to_string())?;
    if p == 0 || q == 0 {
        return Err("curve indices must be positive".to_string());
    }
    Ok((p, q))
}

/// Appends `suffix` to the file name of `path`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(suffix);
    path.with_file_name(name)
}

fn dispatch(cli: &Cli) -> CmdResult<i32> {
    match &cli.command {
        Command::Generate(cmd) => commands::generate::run(cmd),
        Command::Fit(cmd) => commands::fit::run(cmd),
        Command::Eval(cmd) => commands::eval::run(cmd),
        Command::Reproduce(cmd) => commands::reproduce::run(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
