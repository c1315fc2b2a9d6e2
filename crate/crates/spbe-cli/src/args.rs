use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spbe_core::rational::{parse_rational, Rational};
use spbe_core::solver::TieBreak;

fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| format!("{text:?}: {e}"))
}

fn tie_break_arg(text: &str) -> Result<TieBreak, String> {
    TieBreak::parse(text).ok_or_else(|| format!("{text:?}: expected a permutation of reveal,buy,wait"))
}

#[derive(Debug, Parser)]
#[command(name = "spbe", version, about = "Structured equilibria and cascades in a patient social-learning game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for a profile by value iteration.
    Solve(SolveArgs),
    /// Certify a profile exactly, or search for the smallest certifying discount.
    Verify(VerifyArgs),
    /// Write one of the closed-form profiles.
    Profile(ProfileArgs),
    /// Exact cascade outcome distribution of a profile.
    Cascade(CascadeArgs),
    /// Monte Carlo play of a profile, compared with the exact distribution.
    Simulate(SimulateArgs),
    /// Revelation chain of a profile: absorption from a start state and the y bound.
    Chain(ChainArgs),
    /// Residual of the full-history equations for a small profile.
    Fpe2(Fpe2Args),
    /// Monte Carlo search for profitable unilateral deviations.
    Deviate(DeviateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub n: usize,
    /// Signal error probability, e.g. 1/10 or 0.1 (parsed exactly).
    #[arg(long, value_parser = rational_arg)]
    pub p: Rational,
    /// Discount factor in [0, 1], parsed exactly.
    #[arg(long, value_parser = rational_arg)]
    pub delta: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Ascii,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Preference order at indifference.
    #[arg(long, value_parser = tie_break_arg, default_value = "reveal,buy,wait")]
    pub tie_break: TieBreak,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub indifference_eps: f64,
    /// Profile file whose prescriptions win where consistent.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Also certify the result with the exact verifier.
    #[arg(long)]
    pub verify: bool,
    /// Profile file to compare the result with.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub profile: PathBuf,
    /// Verify at this discount instead of the one stored in the file.
    #[arg(long, value_parser = rational_arg)]
    pub delta: Option<Rational>,
    /// Binary search over j / 2^depth for the smallest certifying discount.
    #[arg(long)]
    pub bisect_delta: bool,
    #[arg(long, default_value_t = 24)]
    pub depth: u32,
    /// Write the report as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    Myopic,
    Delta1,
    LargeDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RowArg {
    Buy,
    Reveal,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum)]
    pub kind: ProfileKind,
    #[command(flatten)]
    pub game: GameArgs,
    /// Prescription on the (r=1, y=1) row of the myopic profile.
    #[arg(long, value_enum, default_value_t = RowArg::Buy)]
    pub row: RowArg,
    /// Print the structural property report to stderr.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ValueArg {
    #[value(name = "-1")]
    Minus,
    #[value(name = "1")]
    Plus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    pub profile: PathBuf,
    #[arg(long, value_enum, default_value_t = ValueArg::Both, allow_hyphen_values = true)]
    pub v: ValueArg,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    /// Class probabilities (`v,class,probability`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cumulative bad-cascade probability by onset w (`v,w,cumulative_probability`).
    #[arg(long)]
    pub cumulative: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub runs: usize,
    /// Turn limit per run; defaults to 100 N.
    #[arg(long)]
    pub max_turns: Option<usize>,
    #[arg(long, value_enum, default_value_t = ValueArg::Both, allow_hyphen_values = true)]
    pub v: ValueArg,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    pub format: TableFormat,
    /// Per-run statistics as CSV.
    #[arg(long)]
    pub runs_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub start: i32,
}

#[derive(Debug, Args)]
pub struct Fpe2Args {
    pub profile: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeviateArgs {
    pub profile: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Turns per sample; derived from the tail tolerance when absent.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub tail_tolerance: f64,
    #[arg(long)]
    pub sequential: bool,
}
