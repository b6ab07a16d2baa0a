use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dirtail",
    version,
    about = "Tail asymptotics of random Dirichlet series S(α) = Σ k^-α η_k"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Distribution of η: rademacher, gaussian_sanity, two_point:b=2,theta=0.3,
    /// poly_edge:b=1,r=2, or a path to a TOML file with a [dist] table
    #[arg(long, global = true, default_value = "rademacher")]
    pub dist: String,
    /// Decay exponent, in (1/2, 1]
    #[arg(long, global = true, default_value_t = 1.0)]
    pub alpha: f64,
    /// Output format [default: csv for sweep, json otherwise]
    #[arg(long, global = true, value_enum)]
    pub out: Option<Format>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailMethod {
    Thm,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RemainderArg {
    Gaussian,
    Truncated,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Asymptotic constants σ²_α, κ_α, q, γ_α and their cross-checks
    Constants,
    /// Solve the saddle-point equation M(t) = x
    SolveT {
        #[arg(long)]
        x: f64,
    },
    /// Tail probability P{S(α) > x}
    Tail {
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum, default_value_t = TailMethod::Thm)]
        method: TailMethod,
    },
    /// Density of S(α) at x from the edge-law theorem
    Density {
        #[arg(long)]
        x: f64,
    },
    /// Importance-sampling estimate of P{S(α) > x}
    Simulate {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Number of exactly simulated coordinates, or `auto`
        #[arg(long, default_value = "auto")]
        k_trunc: String,
        #[arg(long, value_enum, default_value_t = RemainderArg::Gaussian)]
        remainder: RemainderArg,
    },
    /// Exact enumeration of P{S_k > x} with a bracket on P{S(α) > x}
    Oracle {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        k: usize,
    },
    /// Distance of the normalised tilted sum from its Gaussian limit
    LocalClt {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Tail estimates by every method over a grid of x (CSV by default)
    Sweep {
        /// Comma-separated ascending x values
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        grid: Vec<f64>,
        /// Monte Carlo samples per grid point; 0 disables the column
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        /// Enumerated coordinates for the oracle columns (discrete laws)
        #[arg(long, default_value_t = 16)]
        oracle_k: usize,
    },
    /// Run the cross-check suite and report every check
    Validate {
        #[arg(long, default_value_t = 20_000)]
        n: usize,
    },
}
