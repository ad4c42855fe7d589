//! `igcx`: batch front end for the information-geometry toolkit.
//!
//! Exit codes: 0 success, 1 validation failure, 2 invalid input,
//! 3 oracle deviation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "igcx", version, about = "Information geometry of correlated Gaussian models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fisher-Rao metric, inverse and determinant at a point
    Metric(MetricArgs),
    /// Christoffel symbols, Ricci tensor and scalar curvature at a point
    Curvature(CurvatureArgs),
    /// Geodesic of the equal-variance model sampled on a uniform grid
    Geodesic(GeodesicArgs),
    /// Volume, averaged volume and entropy along the canonical geodesic
    Igc(IgcArgs),
    /// Asymptotic compression ratio over a grid of correlations
    Ratio(RatioArgs),
    /// Run the built-in oracle suite
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    #[serde(rename = "json")]
    Json,
    #[serde(rename = "csv")]
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Model {
    #[serde(rename = "full4d")]
    Full4d,
    #[serde(rename = "reduced3d")]
    Reduced3d,
    #[serde(rename = "diagonal")]
    Diagonal,
    #[value(hide = true)]
    #[serde(rename = "flat-test")]
    FlatTest,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output format (json for single points, csv for curves by default)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to FILE (plus FILE.manifest.json) instead of stdout
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// JSON file supplying flags by name; command-line flags win
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PointArgs {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub r: f64,
    /// Common spread of the equal-variance model
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_y: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu_y: f64,
    /// Means of the diagonal model, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0", allow_negative_numbers = true)]
    pub means: Vec<f64>,
    /// Spreads of the diagonal model, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    #[arg(long, value_enum, default_value = "reduced3d")]
    pub model: Model,
    #[command(flatten)]
    #[serde(flatten)]
    pub point: PointArgs,
    /// Compare against the Gauss-Hermite estimate (full4d only)
    #[arg(long)]
    pub check_quadrature: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Mode {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "fd")]
    Fd,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurvatureArgs {
    #[arg(long, value_enum, default_value = "reduced3d")]
    pub model: Model,
    #[command(flatten)]
    #[serde(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub mode: Mode,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Method {
    #[serde(rename = "closed")]
    Closed,
    #[serde(rename = "ode")]
    Ode,
    #[serde(rename = "both")]
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GeodesicArgs {
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a1: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub a2: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tau_max: f64,
    /// Number of grid intervals; rows = steps + 1
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub method: Method,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IgcArgs {
    /// Correlation, strictly inside (0, 1)
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma0: f64,
    /// Canonical constants A1 = -A2 = a
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 1e4)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 500)]
    pub points: usize,
    /// Logarithmically spaced grid (linear otherwise)
    #[arg(long)]
    pub log_grid: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long, default_value_t = 0.001, allow_negative_numbers = true)]
    pub r_min: f64,
    #[arg(long, default_value_t = 0.999, allow_negative_numbers = true)]
    pub r_max: f64,
    #[arg(long, default_value_t = 999)]
    pub points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FaultArg {
    #[serde(rename = "flip-ricci-sign")]
    FlipRicciSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ReportFormat {
    #[serde(rename = "text")]
    Text,
    #[serde(rename = "json")]
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    /// Seed of the random test points and samples
    #[arg(long, default_value_t = igcx_core::validation::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<FaultArg>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// How a command that produced output ended.
pub enum Outcome {
    Success,
    ValidationFailed,
    Deviation(String),
}

/// A command that could not produce its output.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Numerical(String),
}

impl From<igcx_core::Error> for Failure {
    fn from(e: igcx_core::Error) -> Self {
        use igcx_core::Error as E;
        match e {
            E::QuadratureUnconverged { .. } | E::StepFailure { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("i/o error: {e}"))
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("IGCX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("IGCX_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Metric(a) => commands::metric(a),
        Command::Curvature(a) => commands::curvature(a),
        Command::Geodesic(a) => commands::geodesic(a),
        Command::Igc(a) => commands::igc(a),
        Command::Ratio(a) => commands::ratio(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => ExitCode::from(1),
        Ok(Outcome::Deviation(msg)) => {
            eprintln!("oracle deviation: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
