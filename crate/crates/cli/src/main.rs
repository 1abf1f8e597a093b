//! `entroflow`: mesh generation, flow runs and entropy analyses from the
//! command line.

mod commands;
mod config;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;
pub const EXIT_RANGE: u8 = 5;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl From<entroflow::Error> for Failure {
    fn from(e: entroflow::Error) -> Self {
        use entroflow::Error as E;
        let code = match &e {
            E::InvalidArgument(_) | E::UnsupportedIndex(_) | E::DimensionMismatch(_) | E::InvalidSurface(_) => EXIT_USAGE,
            E::Io(_) | E::Parse(_) => EXIT_IO,
            E::OutOfRange(_) | E::InsufficientSamples(_) => EXIT_RANGE,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "entroflow", version, about = "Mean curvature flow and Gaussian entropy laboratory")]
struct Cli {
    /// TOML file with defaults for any command's parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or normalize a geometry file.
    Make(MakeArgs),
    /// Run mean curvature flow and store the trajectory.
    Flow(FlowArgs),
    /// Entropy of a surface.
    Entropy(EntropyArgs),
    /// Gaussian density of a stored trajectory at a space-time point.
    Density(PointArgs),
    /// Parabolic rescalings toward the tangent flow.
    Rescale(PointArgs),
    /// Self-shrinker residual and shape classification.
    Shrinker(ShrinkerArgs),
    /// Closed-form entropies of round spheres.
    Stone(StoneArgs),
    /// Run a built-in property suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Shape {
    Circle,
    Polygon,
    Sphere,
    Ellipsoid,
    Obj,
}

#[derive(Args)]
pub struct MakeArgs {
    pub shape: Shape,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long)]
    pub subdiv: Option<usize>,
    /// Semi-axes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<f64>>,
    /// Source file for `polygon` and `obj`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Trajectory directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub snapshot_every: Option<f64>,
    #[arg(long)]
    pub remesh_every: Option<usize>,
}

#[derive(Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of vertex starts besides the centroid.
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct PointArgs {
    /// Trajectory directory.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV time series.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Space point `x,y[,z]`; defaults to the detected singular point.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Option<Vec<f64>>,
    /// Space-time point's time; defaults to the estimated singular time.
    #[arg(long)]
    pub time: Option<f64>,
    /// Sample times (density only).
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Number of dyadic scales (rescale only).
    #[arg(long)]
    pub scales: Option<usize>,
}

#[derive(Args)]
pub struct ShrinkerArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct StoneArgs {
    #[arg(long, default_value_t = 1)]
    pub from: usize,
    #[arg(long, default_value_t = 10)]
    pub to: usize,
    /// Optional CSV copy of the table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq, Debug)]
pub enum Suite {
    Monotonicity,
    EntropyInvariance,
    ShrinkingSphere,
    TangentCircle,
    Pinching,
}

#[derive(Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Machine-readable result list.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ENTROFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("ENTROFLOW_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Make(a) => commands::make(&a, &cfg),
        Command::Flow(a) => commands::flow(&a, &cfg),
        Command::Entropy(a) => commands::entropy(&a, &cfg),
        Command::Density(a) => commands::density(&a, &cfg),
        Command::Rescale(a) => commands::rescale(&a, &cfg),
        Command::Shrinker(a) => commands::shrinker(&a, &cfg),
        Command::Stone(a) => commands::stone(&a),
        Command::Verify(a) => verify::run(&a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
