use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use twodsd::{Direction, Method, OrderKind, Parallelism, Variant};

use crate::ingest::{ColumnSpec, HeaderMode};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "twodsd",
    version,
    about = "2DSD index, minimum violation ratio and bootstrap tests of almost stochastic dominance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// 2DSD index of the pair (x1, x2) and its region for a given epsilon.
    Index(IndexArgs),
    /// Minimum violation ratio for the declared direction.
    Mvr(MvrArgs),
    /// Bootstrap test of almost stochastic dominance.
    Test(TestArgs),
    /// Monte Carlo power curves and estimator consistency on a scenario.
    Simulate(SimulateArgs),
    /// Population MVR of a scenario by quadrature.
    Oracle(OracleArgs),
    /// Tail integrability and degeneracy diagnostics for a pair of samples.
    Diagnose(DiagnoseArgs),
    /// Draw a synthetic sample and write it as CSV.
    Sample(SampleArgs),
}

fn workers_to_parallelism(workers: usize) -> Parallelism {
    if workers == 0 {
        Parallelism::Auto
    } else {
        Parallelism::Workers(workers)
    }
}

/// Two samples, either from two files or from two columns of one file.
#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// First sample (CSV or TSV).
    #[arg(long)]
    pub x1: PathBuf,
    /// Second sample. When omitted, both samples are read from the x1 file
    /// using --col1 and --col2.
    #[arg(long)]
    pub x2: Option<PathBuf>,
    /// Column of the first sample: a header name or a 0-based index.
    #[arg(long, default_value = "0")]
    #[serde(serialize_with = "ser_display")]
    pub col1: ColumnSpec,
    /// Column of the second sample.
    #[arg(long)]
    #[serde(serialize_with = "ser_display_opt")]
    pub col2: Option<ColumnSpec>,
    #[arg(long, value_enum, default_value_t)]
    pub header: HeaderMode,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_display_opt<S: serde::Serializer, T: std::fmt::Display>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionArg {
    /// Sample 1 is hypothesized dominated by sample 2.
    #[value(name = "1", alias = "first")]
    #[serde(rename = "first_dominated")]
    First,
    /// Sample 2 is hypothesized dominated by sample 1.
    #[value(name = "2", alias = "second")]
    #[serde(rename = "second_dominated")]
    Second,
    /// Run both directions and report each.
    Both,
}

impl DirectionArg {
    pub fn single(self) -> Option<Direction> {
        match self {
            DirectionArg::First => Some(Direction::FirstDominated),
            DirectionArg::Second => Some(Direction::SecondDominated),
            DirectionArg::Both => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IndexArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "first")]
    pub order: OrderKind,
    /// Violation ratio used to classify the index into regions.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Absolute tolerance of the region classification; scaled to the
    /// index magnitude when omitted.
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MvrArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "first")]
    pub order: OrderKind,
    #[arg(long, value_enum, default_value = "1")]
    pub direction: DirectionArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BootstrapArgs {
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 2000)]
    #[serde(rename = "B")]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core. Results do not depend
    /// on this value.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
}

impl BootstrapArgs {
    pub fn parallelism(&self) -> Parallelism {
        workers_to_parallelism(self.workers)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "first")]
    pub order: OrderKind,
    #[arg(long, default_value = "a")]
    pub variant: Variant,
    /// Pre-specified violation ratio in [0, 0.5).
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "case1")]
    pub method: Method,
    /// Contact-set constant of the Case 2 enlargement.
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "1")]
    pub direction: DirectionArg,
    /// Also report the smallest epsilon at which test (a) rejects.
    #[arg(long)]
    pub min_epsilon: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Directory for plot data: the index with its bootstrap cloud and the
    /// two target functions.
    #[arg(long)]
    #[serde(skip)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulateMode {
    /// Rejection rate of test (a) along an epsilon grid.
    Power,
    /// Median absolute error of the MVR estimate across sample sizes.
    Consistency,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    /// Built-in scenario (1, 2, 3, 4sub) or a JSON scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum, default_value = "power")]
    pub mode: SimulateMode,
    /// Sample size of each simulated sample (power mode).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Sample sizes (consistency mode), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,50000")]
    pub n_grid: Vec<usize>,
    /// Monte Carlo runs.
    #[arg(long = "N", default_value_t = 100)]
    #[serde(rename = "N")]
    pub runs: usize,
    #[arg(long = "B", default_value_t = 500)]
    #[serde(rename = "B")]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Epsilon grid, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16,0.18,0.2,0.25,0.3"
    )]
    pub epsilon_grid: Vec<f64>,
    #[arg(long, default_value = "case1")]
    pub method: Method,
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Full-scale settings: N = 500 and B = 2000.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// Directory for the power-curve plot data.
    #[arg(long)]
    #[serde(skip)]
    pub plot_data: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

impl SimulateArgs {
    pub fn parallelism(&self) -> Parallelism {
        workers_to_parallelism(self.workers)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    /// Built-in scenario (1, 2, 3, 4sub), "all", or a JSON scenario file.
    #[arg(long, default_value = "all")]
    pub scenario: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "first")]
    pub order: OrderKind,
    /// Contact-set constant used to report the enlargement a_n.
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    /// Built-in scenario (1, 2, 3, 4sub) or a JSON scenario file.
    #[arg(long, conflicts_with = "dist", required_unless_present = "dist")]
    pub scenario: Option<String>,
    /// Which population of the scenario to draw.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub population: u8,
    /// Distribution as JSON, for example '{"family":"lognormal","mu":7.5,"sigma":0.6}'.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo run index; the pair drawn for run k matches `simulate`.
    #[arg(long, default_value_t = 0)]
    pub run: u64,
    /// Header of the written column.
    #[arg(long, default_value = "x")]
    pub column_name: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}
