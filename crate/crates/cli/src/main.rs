mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxnorm::Error;

#[derive(Parser, Debug)]
#[command(name = "maxnorm", version, about = "Max-of-norm load balancing and k-center clustering")]
struct Cli {
    /// Worker threads for `compare` (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write every LP built by the solvers to this directory (CPLEX LP format).
    #[arg(long, global = true)]
    dump_lp: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance or the tightness weight family.
    Gen(GenArgs),
    /// Approximate an instance and emit the solution with its certificate.
    Solve(SolveArgs),
    /// Compute a fair distribution by round-and-cut.
    FairSolve(FairSolveArgs),
    /// Exact optimum by enumeration.
    Oracle(OracleArgs),
    /// Solver against oracle over a seed range, as CSV.
    Compare(CompareArgs),
    /// Draw solutions from a distribution file and report frequencies.
    Sample(SampleArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Load,
    Cluster,
    FairLoad,
    FairCluster,
    Tightness,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Graph,
}

#[derive(Args, Debug, Clone)]
pub struct InstanceParams {
    #[arg(long, default_value_t = 2)]
    pub machines: usize,
    #[arg(long, default_value_t = 4)]
    pub jobs: usize,
    /// Processing times are integers in [1, pmax].
    #[arg(long, default_value_t = 10)]
    pub pmax: u32,
    /// Probability that an entry p(i,j) is forbidden.
    #[arg(long, default_value_t = 0.0)]
    pub forbidden: f64,
    #[arg(long, default_value_t = 3)]
    pub clients: usize,
    #[arg(long, default_value_t = 4)]
    pub facilities: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Upper end for the per-client connection bound r_j.
    #[arg(long, default_value_t = 2)]
    pub max_r: usize,
    #[arg(long, value_enum, default_value_t = Metric::Euclidean)]
    pub metric: Metric,
    /// `cardinality`, `partition:<parts>` or `knapsack`.
    #[arg(long, default_value = "cardinality")]
    pub constraint: String,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[command(flatten)]
    pub params: InstanceParams,
    /// Tightness family size r = 2^t.
    #[arg(long, default_value_t = 4)]
    pub t: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// `topl:<ell>:<q>` or `maxordered:<file>`.
    #[arg(long, default_value = "topl:1:1")]
    pub norm: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FairSolveArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "topl:1:1")]
    pub norm: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Cut budget per B (default: ten times the solution-space size).
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "topl:1:1")]
    pub norm: String,
    /// Enumeration cap.
    #[arg(long, default_value_t = maxnorm::oracle::DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareKind {
    Load,
    Cluster,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(value_enum)]
    pub kind: CompareKind,
    #[command(flatten)]
    pub params: InstanceParams,
    #[arg(long, default_value = "topl:1:1")]
    pub norm: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 20)]
    pub count: u64,
    #[arg(long, default_value_t = maxnorm::oracle::DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    pub distribution: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        Error::InvalidInput(_) | Error::InvalidSolution(_) | Error::Contract(_) => 3,
        Error::ResourceLimit(_) => 4,
        Error::Solver(_) | Error::Internal(_) => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::InvalidSolution(_) => "invalid-solution",
        Error::Infeasible(_) => "infeasible",
        Error::ResourceLimit(_) => "resource-limit",
        Error::Solver(_) => "solver",
        Error::Contract(_) => "contract",
        Error::Internal(_) => "internal",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(dir) = &cli.dump_lp {
        std::env::set_var(maxnorm::lp::LP_DUMP_ENV, dir);
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::FairSolve(a) => commands::fair_solve(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Compare(a) => commands::compare(a),
        Command::Sample(a) => commands::sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::json!({ "error": error_kind(&e), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(exit_code(&e))
        }
    }
}
