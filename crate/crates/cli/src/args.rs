//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qctl_core::reduce::{Strategy, UniqEncoding};

#[derive(Debug, Parser)]
#[command(
    name = "qctl-qbf",
    version,
    about = "Model checking QCTL by reduction to QBF"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide a formula at a state through a reduction and a solver.
    Check(CheckArgs),
    /// Write the QBF circuit of a reduction to disk.
    Translate(TranslateArgs),
    /// Evaluate a formula directly on the structure.
    Oracle(OracleArgs),
    /// Generate benchmark instances.
    Gen(GenArgs),
    /// Run a benchmark grid and print the report.
    Bench(BenchArgs),
    /// Decide a sabotage modal logic formula.
    SmlCheck(SmlArgs),
}

/// A strategy name or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyChoice {
    One(Strategy),
    All,
}

impl StrategyChoice {
    pub fn strategies(self) -> Vec<Strategy> {
        match self {
            StrategyChoice::One(s) => vec![s],
            StrategyChoice::All => Strategy::ALL.to_vec(),
        }
    }
}

pub fn parse_strategy(s: &str) -> Result<StrategyChoice, String> {
    if s.eq_ignore_ascii_case("all") {
        Ok(StrategyChoice::All)
    } else {
        s.parse().map(StrategyChoice::One)
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Structure file in `.kri` format.
    #[arg(short = 'k', long = "kripke")]
    pub kripke: PathBuf,
    /// Formula text, or a path to a file holding it.
    #[arg(short = 'f', long = "formula")]
    pub formula: String,
    /// Evaluation state; the structure's initial state by default.
    #[arg(long)]
    pub state: Option<String>,
    /// Instance name for reports; the structure file stem by default.
    #[arg(long)]
    pub instance: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReductionArgs {
    /// uu, fp, fpf, pnf, fbv or all.
    #[arg(long, default_value = "pnf", value_parser = parse_strategy)]
    pub strategy: StrategyChoice,
    /// Encoding of the counting quantifiers.
    #[arg(long, default_value = "bitvector")]
    pub uniq: UniqEncoding,
    /// Distance vector bound for fbv; the number of states by default.
    #[arg(long)]
    pub fbv_bound: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Solver name from the config file, or `naive` for the built-in one.
    #[arg(long, default_value = "naive")]
    pub solver: String,
    /// Solver config in TOML.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wall-clock limit in seconds for translation and for solving.
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Print the result as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Qcir,
    Smt,
    Both,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub reduction: ReductionArgs,
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "qcir")]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: Family,
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = ".", global = true)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KconnKind {
    /// Blocking `k - 1` states leaves a path.
    Psi,
    /// `k` marked disjoint paths exist.
    Phi,
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// A root and `n` cycles of length `k`; at most `m` reset states.
    Reset {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
    /// Two `n x n` grids joined by `m` edges; `k` disjoint paths.
    Kconn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "psi")]
        formula: KconnKind,
    },
    /// Nim from the given heaps; does `player` have a winning strategy.
    Nim {
        /// Comma-separated heap sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        heaps: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        player: u8,
    },
    /// `n x m` column grid; `k` targets within `d` steps.
    Resources {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
    /// Random small structures and formulas.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Allow quantifiers under temporal modalities.
        #[arg(long)]
        nested: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Small members of every family, decidable by the built-in solver.
    Desk,
    /// The published benchmark rows; the largest need an external solver.
    Published,
    /// No built-in instances.
    None,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Built-in instance set.
    #[arg(long, value_enum, default_value = "desk")]
    pub suite: Suite,
    /// Directories of generated instances (`.kri` with matching `.qctl`).
    #[arg(long = "dir")]
    pub dirs: Vec<PathBuf>,
    /// Add this many random corpus instances.
    #[arg(long, default_value_t = 0)]
    pub corpus: usize,
    /// Seed of the random corpus.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated strategies, or `all`.
    #[arg(long, default_value = "all", value_delimiter = ',')]
    pub strategy: Vec<String>,
    /// Comma-separated solver names.
    #[arg(long = "solver", default_value = "naive", value_delimiter = ',')]
    pub solvers: Vec<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 600.0)]
    pub timeout: f64,
    /// Worker threads; the config file or the CPU count by default.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "bitvector")]
    pub uniq: UniqEncoding,
    /// Also write the report as CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Keep emitted circuit files here.
    #[arg(long)]
    pub workdir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SmlArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// uu or fp; the flat strategies cannot take the translated formula.
    #[arg(long, default_value = "fp", value_parser = parse_strategy)]
    pub strategy: StrategyChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub json: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn strategy_names() {
        assert_eq!(parse_strategy("ALL"), Ok(StrategyChoice::All));
        assert_eq!(
            parse_strategy("fbv"),
            Ok(StrategyChoice::One(Strategy::Fbv))
        );
        assert!(parse_strategy("fast").is_err());
    }

    #[test]
    fn command_surface_is_consistent() {
        Cli::command().debug_assert();
    }
}
