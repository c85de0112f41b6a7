use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "caloric", version, about = "Parabolic potential theory laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random stream; required by randomized commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Paths per pole for Monte Carlo commands.
    #[arg(long, global = true)]
    pub paths: Option<u64>,
    /// Directory for result files and the run manifest.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Domain description (JSON).
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Operator description (JSON); defaults to the heat operator.
    #[arg(long, global = true)]
    pub operator: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heat kernel evaluation.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Thermal capacity of a slab, optionally intersected with the domain complement.
    Capacity {
        #[command(subcommand)]
        action: CapacityAction,
    },
    /// Hausdorff content of the complement inside a backward cube.
    Content {
        #[command(subcommand)]
        action: ContentAction,
    },
    /// Thickness conditions along sampled boundary points.
    Check {
        #[command(subcommand)]
        action: CheckAction,
    },
    /// Empirical parabolic measure.
    Measure {
        #[command(subcommand)]
        action: MeasureAction,
    },
    /// Monte Carlo Dirichlet solutions.
    Dirichlet {
        #[command(subcommand)]
        action: DirichletAction,
    },
    /// Wiener series partial sums.
    Wiener {
        #[command(subcommand)]
        action: WienerAction,
    },
    /// Packaged experiments.
    Scenario {
        #[arg(value_enum)]
        name: ScenarioName,
    },
    /// Run the oracle suite.
    Validate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    ComplementCube,
    SparseCubes,
    Petrovsky,
    Validation,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::ComplementCube => "complement-cube",
            ScenarioName::SparseCubes => "sparse-cubes",
            ScenarioName::Petrovsky => "petrovsky",
            ScenarioName::Validation => "validation",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum KernelAction {
    Eval {
        #[arg(long = "M")]
        m: f64,
        #[arg(long)]
        n: usize,
        /// `x1,…,xn,t`
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        source: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum CapacityAction {
    /// Capacity of `closed ball(x, r) × [t − r², t − (a·r)²]`.
    Estimate {
        /// Top center `x1,…,xn,t`.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 4)]
        cells_per_radius: usize,
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ContentAction {
    Estimate {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        radius: f64,
        /// Content exponent.
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 4)]
        levels: u32,
        #[arg(long, default_value_t = 3)]
        extra_levels: u32,
        #[arg(long)]
        min_side: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    /// Number of boundary points.
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Radii, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1, 0.05])]
    pub scales: Vec<f64>,
    /// Spatial dimension for dimension-free domains.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum CheckAction {
    Tbhcc {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long)]
        min_side: Option<f64>,
    },
    Tbcdc {
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 4)]
        cells_per_radius: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum MeasureAction {
    Estimate {
        #[arg(long, allow_hyphen_values = true)]
        pole: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DirichletAction {
    Solve {
        /// Repeat for several poles.
        #[arg(long, allow_hyphen_values = true, required = true)]
        pole: Vec<String>,
        /// Boundary datum (JSON).
        #[arg(long)]
        datum: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    HeatBall,
    Cylinder,
}

#[derive(Debug, Subcommand)]
pub enum WienerAction {
    Series {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        terms: usize,
        #[arg(long, value_enum, default_value_t = Mode::HeatBall)]
        mode: Mode,
        #[arg(long, default_value_t = 0.5)]
        a: f64,
        #[arg(long, default_value_t = 4)]
        cells_per_radius: usize,
        #[arg(long = "M", default_value_t = 1.0)]
        m: f64,
    },
}
