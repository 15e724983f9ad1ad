use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmc_core::smc::DeadMode;

#[derive(Debug, Parser)]
#[command(name = "dmc", version, about = "Analyse distributed Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file against the well-formedness and determinacy rules
    Validate(ValidateArgs),
    /// Decide a PBLTL specification by sequential hypothesis testing
    Check(CheckArgs),
    /// Build the global Markov chain explicitly
    Chain(ChainArgs),
    /// Write a benchmark model (and optionally a matching spec)
    Gen(GenArgs),
    /// Verify the trajectory/path measure identity on all short trajectories
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file (JSON)
    #[arg(value_name = "MODEL")]
    pub positional: Option<PathBuf>,
    /// Model file (JSON); alternative to the positional argument
    #[arg(long = "model", value_name = "FILE", conflicts_with = "positional")]
    pub flag: Option<PathBuf>,
}

impl ModelArg {
    pub fn path(&self) -> Option<&PathBuf> {
        self.flag.as_ref().or(self.positional.as_ref())
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output style on stdout
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Report local states that enable no action as warnings only
    #[arg(long)]
    pub allow_idle: bool,
    /// Check distribution sums exactly
    #[arg(long)]
    pub exact_rational: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Specification file
    #[arg(long, value_name = "FILE", required_unless_present = "spec_inline")]
    pub spec: Option<PathBuf>,
    /// Specification text given directly
    #[arg(long, value_name = "TEXT", conflicts_with = "spec")]
    pub spec_inline: Option<String>,
    /// Type I error bound
    #[arg(long, default_value_t = dmc_core::smc::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Type II error bound
    #[arg(long, default_value_t = dmc_core::smc::DEFAULT_BETA)]
    pub beta: f64,
    /// Half-width of the indifference region
    #[arg(long, default_value_t = dmc_core::smc::DEFAULT_DELTA)]
    pub delta: f64,
    /// Seed; a fresh one is drawn and reported when absent
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop each test after this many samples with an inconclusive verdict
    #[arg(long)]
    pub max_samples: Option<u64>,
    /// Sampling threads
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// How to treat agents that can never move again
    #[arg(long, value_enum, default_value_t = DeadModeArg::Never)]
    pub dead_mode: DeadModeArg,
    /// State budget for each dead-agent search
    #[arg(long, default_value_t = dmc_core::smc::DEFAULT_DEAD_BUDGET)]
    pub dead_budget: usize,
    /// Maximum events per sample
    #[arg(long, default_value_t = dmc_core::smc::DEFAULT_STEP_CAP)]
    pub step_cap: u64,
    /// Record the running test score after every sample
    #[arg(long)]
    pub record_scores: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeadModeArg {
    Never,
    Exact,
}

impl From<DeadModeArg> for DeadMode {
    fn from(d: DeadModeArg) -> DeadMode {
        match d {
            DeadModeArg::Never => DeadMode::Never,
            DeadModeArg::Exact => DeadMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Give up after this many chain states
    #[arg(long, default_value_t = dmc_core::semantics::DEFAULT_MAX_STATES)]
    pub max_states: usize,
    /// Use exact rational arithmetic for transition probabilities
    #[arg(long)]
    pub exact_rational: bool,
    /// Also search the interleaved transition system for deadlocks
    #[arg(long)]
    pub interleaved: bool,
    /// Write the chain to this file
    #[arg(long, value_name = "FILE")]
    pub export: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ExportFormat::Text)]
    pub export_format: ExportFormat,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Coin,
    ItaiRodeh,
    Dining,
    Random,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: FamilyArg,
    /// Number of processes or philosophers
    #[arg(long, short = 'n', default_value_t = 3)]
    pub n: u32,
    /// Identity range for leader election (defaults to N)
    #[arg(long)]
    pub id_range: Option<u32>,
    /// Channel capacity for leader election
    #[arg(long, default_value_t = 1)]
    pub capacity: u32,
    /// Compile a count of eaten philosophers into the model
    #[arg(long)]
    pub quota: Option<u32>,
    /// Seed for the random family
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model output file; stdout when absent
    #[arg(long, short = 'o', value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Write the family's standard specification to this file
    #[arg(long, value_name = "FILE")]
    pub spec_output: Option<PathBuf>,
    /// Probability threshold of the written specification
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Election rounds covered by the leader specification
    #[arg(long, default_value_t = 2)]
    pub rounds: u32,
    /// Local move bound of the dining specification
    #[arg(long, default_value_t = 12)]
    pub bound: u32,
    /// Fraction of philosophers that must have eaten
    #[arg(long, default_value_t = 0.4)]
    pub fraction: f64,
    /// Pretty-print the model
    #[arg(long)]
    pub pretty: bool,
    /// Also write the JSON report to this file
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Longest trajectory checked, in events
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Compare exactly with rational arithmetic
    #[arg(long)]
    pub exact_rational: bool,
    #[arg(long, default_value_t = dmc_core::semantics::DEFAULT_MAX_STATES)]
    pub max_states: usize,
    #[command(flatten)]
    pub output: Output,
}
