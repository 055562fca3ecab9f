use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "convineq",
    version,
    about = "Solutions of f >= f*f on grids: build, verify, measure",
    args_override_self = true
)]
pub struct Cli {
    /// TOML file mirroring the flags; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Coefficients c_n of sqrt(1 - x) and their partial sums, as CSV.
    Coeffs(CoeffsArgs),
    /// Samples a closed-form family on a grid.
    Family(FamilyArgs),
    /// Builds a solution from a nonnegative residual u.
    Construct(ConstructArgs),
    /// Checks f >= f*f; exits 2 on a violation.
    Verify(VerifyArgs),
    /// Moment growth on nested windows.
    Moments(MomentsArgs),
    /// Ball mass of rescaled n-fold convolutions.
    Clt(CltArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct GridArgs {
    /// Half-width of the window [-L, L]^d.
    #[arg(long = "L", default_value_t = 64.0)]
    #[serde(rename = "L")]
    pub extent: f64,
    /// Points per axis, a power of two.
    #[arg(long = "N", default_value_t = 4096)]
    #[serde(rename = "N")]
    pub points: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    /// Poisson kernel f_{a,t}.
    Poisson,
    /// f_{a,t} - f_{a^2,2t}, the residual of the Poisson kernel.
    Margin,
    /// sin(2 pi a x) / (pi x).
    Sinc,
    /// Centered Gaussian of width sigma, grid-normalized to `mass`.
    Gaussian,
    /// Product bump on [-1, 1]^d, grid-normalized to `mass`.
    Bump,
    /// (1 + |x|)^-3.
    HeavyTail,
    /// Uniform on [-sqrt 3, sqrt 3].
    Uniform,
    /// a times a standard Gaussian with -1 on |x| <= delta.
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpShape {
    Indicator,
    RaisedCosine,
    Epanechnikov,
}

impl From<BumpShape> for convineq::construct::Bump {
    fn from(b: BumpShape) -> Self {
        match b {
            BumpShape::Indicator => Self::Indicator,
            BumpShape::RaisedCosine => Self::RaisedCosine,
            BumpShape::Epanechnikov => Self::Epanechnikov,
        }
    }
}

/// Where a grid function comes from: a file, or a named family sampled on the grid.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// CSV or JSON (by extension) grid function; overrides the grid flags.
    #[arg(long, value_name = "PATH", conflicts_with = "family")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, value_enum, default_value_t = BumpShape::Indicator)]
    pub bump: BumpShape,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffsArgs {
    /// Number of coefficients.
    #[arg(long)]
    pub n: usize,
    /// CSV destination; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FamilyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// CSV or JSON destination; CSV on standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Series,
    Spectral,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    /// The residual u.
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    pub method: Method,
    /// L1 truncation target; chosen from the residual mass when absent.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = convineq::construct::DEFAULT_MAX_TERMS)]
    pub max_terms: usize,
    /// Fixed number of series terms instead of an epsilon target.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Destination for f (series f when both are built); CSV or JSON by extension.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Violation threshold for f - f*f; 1e-6 max|f| when absent.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Destination for the residual f - f*f.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Critical,
    Subcritical,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    /// The function to scan, or with --demo the residual u to build from.
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Build f from the residual first and scan that.
    #[arg(long, value_enum)]
    pub demo: Option<Regime>,
    /// Series target for --demo.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Window widening used while building for --demo.
    #[arg(long)]
    pub guard: Option<usize>,
    /// CSV of (p, window, value, increment).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[value(name = "finite_variance", alias = "finite-variance")]
    FiniteVariance,
    #[value(name = "infinite_variance", alias = "infinite-variance")]
    InfiniteVariance,
}

#[derive(Debug, Args, Serialize)]
pub struct CltArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub radii: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "4,16,64,256")]
    pub n: Vec<u32>,
    /// Monte Carlo replicates per n; 0 disables the cross-check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Window half-width for sampling w.
    #[arg(long = "w-L")]
    #[serde(rename = "w-L")]
    pub w_extent: Option<f64>,
    #[arg(long = "w-N")]
    #[serde(rename = "w-N")]
    pub w_points: Option<usize>,
    /// Window half-width for the rescaled densities.
    #[arg(long = "out-L")]
    #[serde(rename = "out-L")]
    pub out_extent: Option<f64>,
    #[arg(long = "out-N")]
    #[serde(rename = "out-N")]
    pub out_points: Option<usize>,
    /// CSV of (R, n, p_grid, phi, p_mc, stderr, mass).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs",
            Command::Family(_) => "family",
            Command::Construct(_) => "construct",
            Command::Verify(_) => "verify",
            Command::Moments(_) => "moments",
            Command::Clt(_) => "clt",
        }
    }
}
