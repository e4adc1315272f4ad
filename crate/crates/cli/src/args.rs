use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "preint",
    version,
    about = "Cdf and pdf estimation by preintegration on randomly shifted lattice rules",
    args_override_self = true
)]
pub struct Cli {
    /// Read `key = value` defaults from this file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the cdf or pdf at one level t.
    Point(PointArgs),
    /// Chebyshev interpolant of the cdf or pdf on [a, b].
    Curve(CurveArgs),
    /// Error against N for several methods, with fitted slopes.
    Converge(ConvergeArgs),
    /// Single-worker wall times of plain and preintegrated estimators.
    Time(TimeArgs),
    /// Run the invariant checks on the configured model and lattice.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Linear,
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorKind {
    Cdf,
    Pdf,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value = "lognormal")]
    pub model: ModelKind,

    /// Linear model coefficients c0,c1,...; c0 multiplies y0.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
    pub coeffs: Vec<f64>,

    /// Linear model offset b.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,

    /// Covariance: equicorr:<dim>:<diag>:<offdiag>, recipmax:<dim> or a file.
    #[arg(long, default_value = "equicorr:16:1:0.5")]
    pub cov: String,

    /// Generating vector: builtin:<name> or a file path.
    #[arg(long, default_value = "builtin:lat33002", conflicts_with = "korobov")]
    pub lattice: String,

    /// Use the Korobov vector (1, a, a^2, ...) instead of --lattice.
    #[arg(long, value_name = "A")]
    pub korobov: Option<u64>,

    #[arg(long, env = "PREINT_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Newton stopping tolerance |phi(xi) - t|.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    /// Write CSV here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cdf")]
    pub kind: EstimatorKind,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, default_value_t = 1 << 14)]
    pub n: usize,
    /// Number of random shifts.
    #[arg(long, default_value_t = 8)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cdf")]
    pub kind: EstimatorKind,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Interpolation degree; defaults to ceil(N^(1/4)) + 10.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1 << 14)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    /// Equispaced sample points of the interpolant.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "cdf")]
    pub kind: EstimatorKind,
    /// Level for a pointwise study.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["t_quantile", "a", "b"])]
    pub t: Option<f64>,
    /// Pick t as this quantile, located by a pilot run.
    #[arg(long)]
    pub t_quantile: Option<f64>,
    /// Interval for a curve (RMISE) study.
    #[arg(long, allow_hyphen_values = true, requires = "b")]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    pub b: Option<f64>,
    /// Fixed interpolation degree for curve studies.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated N values (powers of two, increasing).
    #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192,16384,32768,65536")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    #[arg(long, value_delimiter = ',', default_value = "mc,qmc_preint")]
    pub methods: Vec<String>,
    /// Reference curve size; defaults to 4 times the largest N.
    #[arg(long)]
    pub ref_n: Option<usize>,
    #[arg(long, default_value_t = 42)]
    pub ref_m: usize,
    #[arg(long, default_value_t = 16)]
    pub ref_r: usize,
    #[arg(long, default_value_t = 256)]
    pub quad_points: usize,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, value_delimiter = ',', default_value = "8192,16384,32768,65536")]
    pub n_list: Vec<usize>,
    /// Runs per measurement; the fastest is kept.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1 << 10)]
    pub n: usize,
    /// Random fibers for the root-finder check.
    #[arg(long, default_value_t = 10_000)]
    pub fibers: usize,
}
