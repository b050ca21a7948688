use std::path::PathBuf;

use ccca::{AlphaUpdate, Contrast, CopulaFamily, SeparationConfig, StepRule};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ccca",
    version,
    about = "Copula-statistic component analysis of dependent sources"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the CoS → α regression for one or more copula families.
    TrainRegression(TrainArgs),
    /// Simulate dependent sources, mix them and separate the mixture.
    Synth(SynthArgs),
    /// Separate a recorded two-channel CSV.
    Separate(SeparateArgs),
    /// Print the pairwise CoS matrix of a CSV.
    Cos(CosArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Output coefficients file.
    #[arg(long, value_name = "PATH")]
    pub coeffs: PathBuf,
    /// Comma-separated families; all four by default.
    #[arg(long, value_delimiter = ',', value_parser = parse_family)]
    pub family: Vec<CopulaFamily>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Samples per grid point.
    #[arg(long, default_value_t = ccca::regression::DEFAULT_TRAINING_SAMPLES)]
    pub samples: usize,
    /// α values per family.
    #[arg(long, default_value_t = ccca::regression::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Ccca,
    Cca,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginChoice {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphaUpdateChoice {
    PerIteration,
    OnceFromObservations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepChoice {
    Adaptive,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContrastChoice {
    Smoothed,
    Integrated,
    Plugin,
}

/// Descent settings shared by `synth` and `separate`.
#[derive(Debug, Clone, Args)]
pub struct DescentArgs {
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub fd_step: f64,
    #[arg(long, value_enum, default_value_t = AlphaUpdateChoice::PerIteration)]
    pub alpha_update: AlphaUpdateChoice,
    #[arg(long, value_enum, default_value_t = StepChoice::Adaptive)]
    pub step_rule: StepChoice,
    #[arg(long, value_enum, default_value_t = ContrastChoice::Smoothed)]
    pub contrast: ContrastChoice,
    /// Lattice size of the smoothed and integrated contrasts.
    #[arg(long, default_value_t = 100)]
    pub contrast_grid: usize,
}

impl DescentArgs {
    pub fn config(&self, family: CopulaFamily) -> SeparationConfig<f64> {
        let mut c = SeparationConfig::new(family);
        c.mu = self.mu;
        c.epsilon = self.epsilon;
        c.max_iter = self.max_iter;
        c.fd_step = self.fd_step;
        c.alpha_update = match self.alpha_update {
            AlphaUpdateChoice::PerIteration => AlphaUpdate::PerIteration,
            AlphaUpdateChoice::OnceFromObservations => AlphaUpdate::OnceFromObservations,
        };
        c.step_rule = match self.step_rule {
            StepChoice::Adaptive => StepRule::Adaptive,
            StepChoice::Fixed => StepRule::Fixed,
        };
        c.contrast = match self.contrast {
            ContrastChoice::Smoothed => Contrast::Smoothed {
                grid: self.contrast_grid,
            },
            ContrastChoice::Integrated => Contrast::Integrated {
                grid: self.contrast_grid,
            },
            ContrastChoice::Plugin => Contrast::Plugin,
        };
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// JSON report destination; printed to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Per-iteration CSV trace destination.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Source copula family: gumbel, clayton, frank or gaussian.
    #[arg(long, value_parser = parse_family)]
    pub family: CopulaFamily,
    /// True dependence parameter of the sources.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Sample count T.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Row-major mixing matrix `a11,a12,a21,a22`.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "1,0.8,0.8,1"
    )]
    pub mixing: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = MarginChoice::Uniform)]
    pub margins: MarginChoice,
    /// Coefficients file (required for CCCA).
    #[arg(long, value_name = "PATH")]
    pub coeffs: Option<PathBuf>,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SeparateArgs {
    /// Two-channel observations, one channel per row.
    pub input: PathBuf,
    /// Source copula family: gumbel, clayton, frank or gaussian.
    #[arg(long, value_parser = parse_family)]
    pub family: CopulaFamily,
    /// Coefficients file written by `train-regression`.
    #[arg(long, value_name = "PATH")]
    pub coeffs: PathBuf,
    /// True sources in the same layout, for SNR and ISR.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Skip the first line of every CSV.
    #[arg(long)]
    pub header: bool,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CosArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Also write the matrix to this file.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<CopulaFamily, String> {
    s.parse()
}
