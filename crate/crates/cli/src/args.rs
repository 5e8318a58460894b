use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stobon", version, about = "Epistemic model checker for the unfaithful-husbands puzzle")]
pub struct Cli {
    /// More detail on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the morning-by-morning protocol after the oracle's proclamation.
    Simulate(SimulateArgs),
    /// Evaluate a formula at the actual world of a village or a model file.
    Check(CheckArgs),
    /// Subjective probability and information content of a formula for one agent.
    Info(InfoArgs),
    /// Sweep an assertion over every 1 <= k <= n <= max-n.
    Verify(VerifyArgs),
    /// Print the formula grammar.
    Grammar,
    /// Print the JSON schema of model files.
    Schema,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Exact,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AssertionArg {
    #[value(name = "S", alias = "s")]
    S,
    #[value(name = "T", alias = "t")]
    T,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of men in the village.
    #[arg(long)]
    pub men: usize,
    /// Unfaithful men, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub unfaithful: Vec<usize>,
    /// Wives who secretly refuse to kill, 1-based, comma separated.
    #[arg(long = "deviant", value_delimiter = ',')]
    pub deviants: Vec<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    pub engine: Engine,
    /// Stop after this many mornings (default: men + 2).
    #[arg(long)]
    pub max_mornings: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VillageArgs {
    /// Build the village with this many men.
    #[arg(long, value_name = "N")]
    pub village: Option<usize>,
    /// Unfaithful men of the village, 1-based, comma separated.
    #[arg(long, value_delimiter = ',', requires = "village")]
    pub unfaithful: Vec<usize>,
    /// Apply the "at least one man is unfaithful" announcement first.
    #[arg(long, requires = "village")]
    pub post_oracle: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub formula: String,
    #[command(flatten)]
    pub village: VillageArgs,
    /// Load a model document instead of building a village.
    #[arg(long, conflicts_with = "village")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    #[arg(long)]
    pub agent: String,
    #[arg(long)]
    pub formula: String,
    #[command(flatten)]
    pub village: VillageArgs,
    #[arg(long, conflicts_with = "village")]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub assertion: AssertionArg,
    #[arg(long, default_value_t = 10)]
    pub max_n: usize,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}
