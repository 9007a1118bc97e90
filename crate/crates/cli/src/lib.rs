//! Front end for the `mlhjb` binary: argument types, the problem catalog and
//! the four subcommands.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod commands;
pub mod config;
pub mod exit;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::catalog::{BoundaryName, ProblemName};
use crate::commands::Feedback;
use crate::config::NumberList;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MLHJB_OUT_DIR";

const AFTER_HELP: &str = "\
Environment:
  MLHJB_OUT_DIR  Output directory for CSV files when neither --out nor an
                 `out` config entry is given (default: current directory).

Exit codes: 0 success, 1 verification tolerance not met,
            2 usage or domain error, 3 divergence or state escape.";

#[derive(Debug, Parser)]
#[command(name = "mlhjb", version, about = "Mittag-Leffler discounted optimal control toolkit", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate E_α(z) or E_{α,β}(z)
    Ml(MlArgs),
    /// Tabulate the semigroup identity E(t)E(s) − ΔE(t,s) = E(t+s)
    Verify(VerifyArgs),
    /// Solve the discounted HJB equation for a catalog problem
    Solve(SolveArgs),
    /// Forward-evaluate the discounted cost of a control law
    Cost(CostArgs),
}

/// Config file shared by all subcommands.
#[derive(Debug, Clone, Args)]
pub struct ConfigArg {
    /// key=value file supplying defaults for any long flag of this command
    /// ('#' starts a comment; unknown keys are errors; flags win)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, after_help = AFTER_HELP)]
pub struct MlArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Second parameter; omit for the one-parameter function
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    /// Relative truncation tolerance of the series [default: 1e-18]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Series term budget [default: 10000]
    #[arg(long)]
    pub max_terms: Option<usize>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, after_help = AFTER_HELP)]
pub struct VerifyArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// First time argument [default: 1]
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated second time arguments [default: 0.5]
    #[arg(long, value_name = "LIST")]
    pub s: Option<NumberList>,
    /// Largest accepted |residual| [default: 1e-5]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Quadrature panels per piece [default: 8]
    #[arg(long)]
    pub panels: Option<usize>,
    /// Extra random (t, s) pairs drawn from (0, 2] [default: 0]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Seed for --samples [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write verify.csv into this directory (see MLHJB_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, after_help = AFTER_HELP)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemName>,
    /// Fractional order in (0, 1] [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Discount rate; negative values discount [default: -0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Time step [default: 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Truncation horizon T [default: 10]
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Grid points per state dimension [default: 129]
    #[arg(long)]
    pub nx: Option<usize>,
    /// Time slices in the residual's memory window [default: 64]
    #[arg(long)]
    pub window: Option<usize>,
    /// Treatment of foot points outside the box [default: clamp]
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryName>,
    /// Comma-separated state for the summary value [default: per problem]
    #[arg(long, value_name = "LIST")]
    pub x0: Option<NumberList>,
    /// Write every stride-th time slice [default: 100]
    #[arg(long)]
    pub stride: Option<usize>,
    /// Output directory (see MLHJB_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true, after_help = AFTER_HELP)]
pub struct CostArgs {
    #[arg(long, value_enum)]
    pub problem: Option<ProblemName>,
    /// Fractional order in (0, 1] [default: 1]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Discount rate [default: -0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated initial state [default: per problem]
    #[arg(long, value_name = "LIST")]
    pub x0: Option<NumberList>,
    /// Integration step [default: 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Truncation horizon T [default: 20]
    #[arg(long)]
    pub horizon: Option<f64>,
    /// policy.csv written by `solve` for the same problem
    #[arg(long, value_name = "FILE", conflicts_with = "feedback")]
    pub policy: Option<PathBuf>,
    /// Built-in law: lqr (Riccati gain for the given lambda), zero, or
    /// const:<u> [default: zero]
    #[arg(long)]
    pub feedback: Option<Feedback>,
    #[command(flatten)]
    pub config: ConfigArg,
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> anyhow::Result<exit::Outcome> {
    match cli.command {
        Command::Ml(a) => commands::ml(a),
        Command::Verify(a) => commands::verify(a),
        Command::Solve(a) => commands::solve(a),
        Command::Cost(a) => commands::cost(a),
    }
}
