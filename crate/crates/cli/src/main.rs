//! `baryclust` command-line front end.

mod commands;
mod io;
mod plot;
mod tree;

use baryclust::baselines::BaselineError;
use baryclust::coding::CodingError;
use baryclust::correspondence::CorrespondenceError;
use baryclust::data::DataError;
use baryclust::eval::EvalError;
use baryclust::partition::PartitionError;
use baryclust::pipeline::PipelineError;
use baryclust::simgen::SimError;
use baryclust::ward::WardError;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "baryclust", version, about = "Cluster mixed-type tables with barycentric coding and chi-square Ward")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the coded matrix Z and its decoding metadata.
    Code(CodeArgs),
    /// Build the Ward hierarchy, pick or apply K, and write partition and plots.
    Cluster(ClusterArgs),
    /// Cut a saved dendrogram into K clusters.
    Cut(CutArgs),
    /// Report the gain-ratio table of a saved dendrogram.
    Selectk(SelectkArgs),
    /// Adjusted Rand index between two partition files.
    Ari(AriArgs),
    /// Generate a synthetic mixed-type dataset with known clusters.
    Simulate(SimulateArgs),
    /// Run the simulation grid and compare methods.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON schema describing each column.
    #[arg(long)]
    pub schema: PathBuf,
    /// barycentric, triangular or escofier.
    #[arg(long, default_value = "barycentric")]
    pub coding: baryclust::CodingMethod,
    /// Tuple width for columns whose schema entry does not set one.
    #[arg(long)]
    pub n_categories: Option<usize>,
    /// Drop rows with missing values instead of failing.
    #[arg(long)]
    pub drop_incomplete: bool,
    /// Remove all-zero coded columns instead of failing.
    #[arg(long)]
    pub prune_empty_columns: bool,
}

#[derive(Args, Debug)]
pub struct CodeArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub table: TableArgs,
    /// Number of clusters; chosen from the gain ratios when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CutArgs {
    /// dendrogram.json written by `cluster`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SelectkArgs {
    /// dendrogram.json written by `cluster`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AriArgs {
    /// Partition CSV (row_id, cluster).
    pub first: PathBuf,
    /// Partition CSV (row_id, cluster).
    pub second: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n: usize,
    /// equal, one10 or one60.
    #[arg(long, default_value = "equal")]
    pub density: baryclust::simgen::Density,
    /// Pairwise overlap between clusters, in (0, 1).
    #[arg(long)]
    pub overlap: f64,
    #[arg(long, default_value_t = 0.5)]
    pub cat_fraction: f64,
    #[arg(long, default_value_t = 10)]
    pub dims: usize,
    #[arg(long, default_value_t = 4)]
    pub cat_levels: usize,
    /// Declare discretized columns ordinal instead of nominal.
    #[arg(long)]
    pub ordinal: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "equal")]
    pub density: Vec<baryclust::simgen::Density>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    pub overlap: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub cat_fraction: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub dims: usize,
    #[arg(long, default_value_t = 4)]
    pub cat_levels: usize,
    #[arg(long)]
    pub ordinal: bool,
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "mixed-hierarchical-B,mixed-hierarchical-T,gower-pam"
    )]
    pub methods: Vec<baryclust::Method>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Problem with what the user supplied, as opposed to a numeric failure.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const INPUT_ERROR: u8 = 2;
const NUMERIC_ERROR: u8 = 3;

fn coding_code(e: &CodingError) -> u8 {
    match e {
        CodingError::Schema(_) | CodingError::LevelOutOfRange { .. } | CodingError::BadTupleWidth(_) => INPUT_ERROR,
        CodingError::InColumn { source, .. } => coding_code(source),
        _ => NUMERIC_ERROR,
    }
}

fn ward_code(e: &WardError) -> u8 {
    match e {
        WardError::BadK { .. } | WardError::BadRange { .. } | WardError::TooFewRows(_) | WardError::Malformed(_) => {
            INPUT_ERROR
        }
        _ => NUMERIC_ERROR,
    }
}

fn pipeline_code(e: &PipelineError) -> u8 {
    match e {
        PipelineError::Coding(c) => coding_code(c),
        PipelineError::Ward(w) => ward_code(w),
        PipelineError::IncompatibleCoding(_) => INPUT_ERROR,
        PipelineError::Baseline(BaselineError::BadK { .. } | BaselineError::MissingColumn(_)) => INPUT_ERROR,
        PipelineError::Baseline(_) | PipelineError::Correspondence(_) => NUMERIC_ERROR,
    }
}

/// 2 for input problems, 3 for numeric or infeasibility failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>()
            || cause.is::<DataError>()
            || cause.is::<std::io::Error>()
            || cause.is::<csv::Error>()
            || cause.is::<serde_json::Error>()
            || cause.is::<PartitionError>()
            || cause.is::<EvalError>()
        {
            return INPUT_ERROR;
        }
        if let Some(e) = cause.downcast_ref::<CodingError>() {
            return coding_code(e);
        }
        if let Some(e) = cause.downcast_ref::<WardError>() {
            return ward_code(e);
        }
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return pipeline_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::BadOmega(_) | SimError::BadSigma(_) => INPUT_ERROR,
                _ => NUMERIC_ERROR,
            };
        }
        if cause.is::<CorrespondenceError>() || cause.is::<BaselineError>() {
            return NUMERIC_ERROR;
        }
    }
    NUMERIC_ERROR
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match cli.command {
        Command::Code(a) => commands::code(&a, &argv),
        Command::Cluster(a) => commands::cluster(&a, &argv),
        Command::Cut(a) => commands::cut(&a, &argv),
        Command::Selectk(a) => commands::selectk(&a, &argv),
        Command::Ari(a) => commands::ari(&a, &argv),
        Command::Simulate(a) => commands::simulate(&a, &argv),
        Command::Bench(a) => commands::bench(&a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
