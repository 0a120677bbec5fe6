use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fuhp",
    version,
    about = "Heat kernels, spherical functions and theta sums on finite upper half-plane graphs"
)]
pub struct Cli {
    /// Run every batch loop on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Field facts: non-square, generators, orbit sizes, degenerate radii.
    Info(InfoArgs),
    /// Vertex and edge lists.
    Graph(GraphArgs),
    /// Adjacency and Laplacian spectra.
    Spectrum(GraphArgs),
    /// Spherical function table with closed-form reconciliation.
    Spherical(GraphArgs),
    /// Heat kernel by radius on a time grid.
    Heat(HeatArgs),
    /// Finite theta sums against the heat kernel.
    Theta(ThetaArgs),
    /// Run the invariant battery; exit 1 on any failure.
    Verify(VerifyArgs),
    /// Classical Jacobi theta θ(z, it) as plain text.
    ClassicalTheta(ClassicalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Verbatim,
    Reconciled,
    Both,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Verbatim => "verbatim",
            Mode::Reconciled => "reconciled",
            Mode::Both => "both",
        }
    }

    pub fn verbatim(self) -> bool {
        matches!(self, Mode::Verbatim | Mode::Both)
    }

    pub fn reconciled(self) -> bool {
        matches!(self, Mode::Reconciled | Mode::Both)
    }
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Odd prime modulus.
    #[arg(long)]
    pub q: u64,
    /// Non-square residue, or `auto` for the smallest one.
    #[arg(long, default_value = "auto")]
    pub delta: String,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InfoArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Generating radius, or `all-regular`.
    #[arg(long = "r-s", visible_alias = "r", default_value = "1")]
    pub r_s: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct HeatArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 1.0])]
    pub t: Vec<f64>,
    /// Also evaluate the matrix-exponential kernel and report the deviation.
    #[arg(long)]
    pub check_oracle: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0])]
    pub t: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Comma-separated odd primes.
    #[arg(long, visible_alias = "q-list", value_delimiter = ',', required = true)]
    pub q: Vec<u64>,
    /// Add the GL(2) method-of-images check for q ≤ 5.
    #[arg(long)]
    pub include_lift: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ClassicalArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z: f64,
    /// Imaginary part of z.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub z_imag: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Terms summed over |n| ≤ n_max.
    #[arg(long, default_value_t = 20)]
    pub n_max: u32,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
