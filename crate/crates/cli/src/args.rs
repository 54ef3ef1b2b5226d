use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use credal::io::OutputFormat;
use credal::query::Method;

#[derive(Debug, Parser)]
#[command(
    name = "credal",
    version,
    about = "Lower and upper posterior bounds for credal networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds on a posterior probability, expectation or variance.
    Query(QueryArgs),
    /// Parse and check a network file.
    Validate(ValidateArgs),
    /// Bounds as one credal parameter varies over a range.
    Sweep(SweepArgs),
    /// Cross-check methods against exhaustive enumeration.
    Oracle(OracleArgs),
}

/// `VAR` or `VAR=VALUE`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub variable: String,
    pub value: Option<String>,
}

fn parse_target(s: &str) -> Result<Target, String> {
    match s.split_once('=') {
        None if !s.is_empty() => Ok(Target {
            variable: s.to_string(),
            value: None,
        }),
        Some((var, val)) if !var.is_empty() && !val.is_empty() => Ok(Target {
            variable: var.to_string(),
            value: Some(val.to_string()),
        }),
        _ => Err(format!("expected VAR or VAR=VALUE, got '{s}'")),
    }
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((var, val)) if !var.is_empty() && !val.is_empty() => Ok((var.to_string(), val.to_string())),
        _ => Err(format!("expected VAR=VALUE, got '{s}'")),
    }
}

/// `VAR.NAME`: a scalar parameter of VAR's credal block.
fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.rsplit_once('.') {
        Some((var, name)) if !var.is_empty() && !name.is_empty() => Ok((var.to_string(), name.to_string())),
        _ => Err(format!("expected VAR.PARAM (e.g. x.eps), got '{s}'")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct EventArgs {
    /// Network file (`.json` files use the JSON mirror).
    #[arg(long, value_name = "FILE")]
    pub net: PathBuf,
    /// Query variable, optionally with a value; without one every value is reported.
    #[arg(long, value_name = "VAR[=VALUE]", value_parser = parse_target)]
    pub target: Option<Target>,
    /// Observed values; VALUE is a value name or a 0-based index.
    #[arg(long, value_name = "VAR=VALUE", num_args = 1.., value_parser = parse_assignment)]
    pub evidence: Vec<(String, String)>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Bracketing width for lavine; convergence tolerance for gradient and qem.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starts for gradient and qem.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    /// Iteration limit for gradient and qem.
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
    /// Annealing steps per chain.
    #[arg(long, default_value_t = 5000)]
    pub anneal_steps: usize,
    /// Largest number of transparent assignments to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_combinations: u128,
}

#[derive(Debug, Clone, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub event: EventArgs,
    /// enum, joint, gradient, qem, anneal, lavine or ne-lp.
    #[arg(long, default_value = "enum")]
    pub method: Method,
    /// Bound the posterior expectation of a utility declared in the file.
    #[arg(long, value_name = "NAME", conflicts_with = "target")]
    pub utility: Option<String>,
    /// With --utility: bound the posterior variance instead.
    #[arg(long, requires = "utility")]
    pub variance: bool,
    /// plain, json or csv.
    #[arg(long, default_value = "plain", value_parser = parse_format)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_name = "FILE")]
    pub net: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub event: EventArgs,
    /// Scalar parameter of VAR's credal block, e.g. `x.eps`.
    #[arg(long, value_name = "VAR.PARAM", value_parser = parse_param)]
    pub param: (String, String),
    /// First value of the parameter.
    #[arg(long)]
    pub from: f64,
    /// Last value of the parameter.
    #[arg(long)]
    pub to: f64,
    /// Number of evenly spaced points, ends included.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// enum, joint, gradient, qem, anneal, lavine or ne-lp.
    #[arg(long, default_value = "enum")]
    pub method: Method,
    /// plain, json or csv.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Without --target every unobserved variable and value is checked.
    #[command(flatten)]
    pub event: EventArgs,
    /// Methods to check (repeatable); all of them by default.
    #[arg(long)]
    pub method: Vec<Method>,
    /// Largest accepted disagreement with enumeration.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: credal::Error| e.to_string())
}
