use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "nsw", version, about = "Nash social welfare solver, fairness pipeline and experiment harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Approximate the NSW optimum of an instance.
    Solve(SolveArgs),
    /// Turn an allocation into a complete ½-EFX allocation.
    Efx(EfxArgs),
    /// Find the exact optimum by enumeration.
    Exact(ExactArgs),
    /// Run a batch of random instances and write CSV.
    Experiment(ExperimentArgs),
    /// Solve and run every certificate check; exit 2 on a violation.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// additive, budget_additive, coverage or partition_matroid_rank.
    #[arg(long)]
    pub family: String,
    /// Number of agents.
    #[arg(short = 'n', long = "agents")]
    pub agents: usize,
    /// Number of items.
    #[arg(short = 'm', long = "items")]
    pub items: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// symmetric or asymmetric.
    #[arg(long, default_value = "symmetric")]
    pub weights: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Compare against the brute-force optimum.
    #[arg(long)]
    pub exact: bool,
    /// Post-process with the ½-EFX pipeline.
    #[arg(long)]
    pub efx: bool,
    /// Embed certificate checks in the report.
    #[arg(long)]
    pub verify: bool,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV with one line per local-search swap.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EfxArgs {
    pub instance: PathBuf,
    /// Starting allocation; defaults to the solver's output.
    #[arg(long)]
    pub alloc: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Allocation file path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    pub instance: PathBuf,
    /// Allocation file path for the optimum.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration.
    pub config: PathBuf,
    /// Treat any ratio above its guarantee as a violation.
    #[arg(long)]
    pub verify: bool,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Also check the ratio against the brute-force optimum.
    #[arg(long)]
    pub exact: bool,
    /// Also check the ½-EFX pipeline (equal weights only).
    #[arg(long)]
    pub efx: bool,
}
