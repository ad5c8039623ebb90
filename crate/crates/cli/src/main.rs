//! `causal-bounds`: causal-effect bounds with partially observed adjustment
//! sets, the state-space reduction, and the simulation studies.
//!
//! Exit codes: 0 success, 2 bad input, 3 criterion violation, 4 solver
//! failure, 5 problem too large for exact verification.

mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use causal_bounds::reduce::{Criterion, FactorOrder};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "causal-bounds", version, about = "Bounds on P(y | do(x)) with partially observed adjustment sets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Master seed for the solver restarts and simulations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Random restarts per solve (default 20).
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Output file (bounds, adjust, simulate) or directory (reduce).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print solver diagnostics.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Bound P(y | do(x)) from P(X, Y, W) and optionally P(U).
    Bounds(BoundsArgs),
    /// Replace a many-state adjustment variable Z by W x U.
    Reduce(ReduceArgs),
    /// Run a simulation study from a JSON config and write CSV rows plus a summary.
    Simulate(SimulateArgs),
    /// Test whether the sets A and B are d-separated given C.
    Dsep(DsepArgs),
    /// Evaluate the adjustment formula on fully observed data.
    Adjust(AdjustArgs),
    /// Samples needed at 30 per table cell, or the largest affordable p.
    Samplesize(SampleSizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    Backdoor,
    Frontdoor,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Backdoor => Criterion::Backdoor,
            CriterionArg::Frontdoor => Criterion::Frontdoor,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum OrderArg {
    WMajor,
    UMajor,
}

impl From<OrderArg> for FactorOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::WMajor => FactorOrder::WMajor,
            OrderArg::UMajor => FactorOrder::UMajor,
        }
    }
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Diagram JSON.
    #[arg(long)]
    pub model: PathBuf,
    /// `{"observed": P(X,Y,W...), "prior": P(U), "unobserved": [...]}`.
    #[arg(long)]
    pub data: PathBuf,
    /// 1-based states x and y.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [1, 1])]
    pub target: Vec<usize>,
    /// Criterion to use; detected from the diagram when omitted.
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
    /// Ignore the prior over the unobserved variables.
    #[arg(long)]
    pub no_prior: bool,
    /// Also impose P(w, u) = P(w) P(u); W and U must be d-separated in the diagram.
    #[arg(long)]
    pub extra_independence: bool,
}

#[derive(Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CPT set or full joint table.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Variable to factor.
    #[arg(long)]
    pub z: String,
    /// States of W.
    #[arg(long)]
    pub p: Option<usize>,
    /// Sample size used to choose p when --p is absent.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum, default_value = "w-major")]
    pub order: OrderArg,
    /// Adjustment set containing Z (comma-separated); defaults to Z alone.
    #[arg(long, value_delimiter = ',')]
    pub adjustment: Vec<String>,
    /// 1-based states x and y used by the equivalence check.
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [1, 1])]
    pub target: Vec<usize>,
    #[arg(long, default_value = "W")]
    pub w_name: String,
    #[arg(long, default_value = "U")]
    pub u_name: String,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Experiment config JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's sample count.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args)]
pub struct DsepArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub b: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub given: Vec<String>,
}

#[derive(Args)]
pub struct AdjustArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CPT set or full joint table.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    /// Adjustment set (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub set: Vec<String>,
    #[arg(long, num_args = 2, value_names = ["X", "Y"], default_values_t = [1, 1])]
    pub target: Vec<usize>,
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionArg>,
}

#[derive(Args)]
pub struct SampleSizeArgs {
    /// State counts of one table, e.g. `2,2,256`; repeatable.
    #[arg(long)]
    pub table: Vec<String>,
    /// States of the variable to factor.
    #[arg(long)]
    pub z_states: Option<usize>,
    /// |X| * |Y|.
    #[arg(long, default_value_t = 4)]
    pub xy: usize,
    /// States of W.
    #[arg(long)]
    pub p: Option<usize>,
    /// Available samples; prints the largest affordable p.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub per_state: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Bounds(a) => commands::bounds(g, a),
        Command::Reduce(a) => commands::reduce(g, a),
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Dsep(a) => commands::dsep(a),
        Command::Adjust(a) => commands::adjust(g, a),
        Command::Samplesize(a) => commands::samplesize(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
