use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "gtep",
    about = "Representative-day planning: cluster hourly history, solve the expansion problem, evaluate clustering error",
    version
)]
pub struct Cli {
    /// TOML file with default values for common flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reduce an hourly history to weighted representative days.
    Cluster(ClusterArgs),
    /// Build and solve the expansion problem for a representative-day set.
    Solve(SolveArgs),
    /// Exact solve plus clustered runs over a K grid, with error report.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic hourly history CSV.
    Synth(SynthArgs),
    /// Re-execute a previous run from its manifest, byte-identically.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ClusterArgs {
    /// Hourly CSV: timestamp, `load_<zone>`..., `wind_<zone>`...
    #[arg(long = "in")]
    pub input: PathBuf,
    /// tkm | mkm
    #[arg(long)]
    pub method: String,
    /// Cluster count for tkm.
    #[arg(long)]
    pub k: Option<usize>,
    /// Stage-1 cluster count for mkm.
    #[arg(long)]
    pub k1: Option<usize>,
    /// Stage-2 cluster count for mkm.
    #[arg(long)]
    pub k2: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default: $GTEP_OUT_DIR or ./gtep-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// System TOML file.
    #[arg(long)]
    pub system: PathBuf,
    /// Representative-day CSV produced by `cluster`.
    #[arg(long)]
    pub repdays: PathBuf,
    /// Write the model to this .lp or .mps file and stop without solving.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub system: PathBuf,
    /// Hourly history CSV (the full horizon).
    #[arg(long)]
    pub history: PathBuf,
    /// Comma-separated representative-day counts, e.g. 2,4,8.
    #[arg(long = "k-grid", value_delimiter = ',')]
    pub k_grid: Vec<usize>,
    /// Comma-separated methods: tkm,mkm.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["tkm".to_string(), "mkm".to_string()])]
    pub methods: Vec<String>,
    /// Number of seeds per (method, K).
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    /// First seed; the run uses seed_base, seed_base+1, ...
    #[arg(long = "seed-base", default_value_t = 0)]
    pub seed_base: u64,
    /// Explicit seed list; overrides --seeds/--seed-base.
    #[arg(long = "seed-list", value_delimiter = ',')]
    pub seed_list: Option<Vec<u64>>,
    /// Solve only the exact full-horizon problem.
    #[arg(long = "exact-only", default_value_t = false)]
    pub exact_only: bool,
    /// Relative MIP gap.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    /// Parallel pipeline rows.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 14)]
    pub days: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// desk (2 load zones, 1 wind zone) or year (the 4-zone layout).
    #[arg(long, default_value = "desk")]
    pub profile: String,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    /// Manifest written by a previous run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the replayed run (default: next to the manifest).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
