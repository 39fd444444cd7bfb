//! Command line front end: generation, statistics, coupled comparisons,
//! replicated experiments and analytic profiles, all seeded explicitly.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use edgestep_core::Error;

/// A problem with the request itself, found after clap parsing (bad rate
/// spec, contradictory flags, out-of-range values).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// Pointwise order violation under `couple --assert-order`.
#[derive(Debug)]
pub struct OrderViolation(pub String);

impl fmt::Display for OrderViolation {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", self.0)
    }
}

impl std::error::Error for OrderViolation {}

/// A tolerance or acceptance condition failed; the reports are already on
/// disk when this is raised.
#[derive(Debug)]
pub struct ToleranceFailure(pub String);

impl fmt::Display for ToleranceFailure {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}", self.0)
    }
}

impl std::error::Error for ToleranceFailure {}

#[derive(Parser)]
#[command(
    name = "edgestep",
    version,
    about = "Preferential attachment graphs driven by an edge-step function: \
             simulation, coupling, statistics and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one graph and write its dump and trajectory files.
    Generate(GenerateArgs),
    /// Report snapshot statistics of a dumped or freshly generated graph.
    Stats(StatsArgs),
    /// Collapse shared random trees under several rates and compare them.
    Couple(CoupleArgs),
    /// Run a named replicated experiment and write its reports.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Tabulate the analytic profile of a rate function.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Rate spec: const:p, rv:gamma[,c][,logbeta], values:v1,v2,..., table:path.
    #[arg(long = "f")]
    f: String,
    /// Number of steps to simulate; the graph ends with exactly t edges.
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Vertex ranks (1-based) whose degree histories are recorded.
    #[arg(long, value_delimiter = ',')]
    track: Vec<u64>,
    /// Directory receiving graph.dump, trajectory.csv, arrivals.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiameterArg {
    /// Exact up to 5000 vertices, double sweep beyond.
    Auto,
    /// All-sources BFS, quadratic.
    Exact,
    /// Two-pass BFS lower bound.
    DoubleSweep,
    /// No diameter column.
    Skip,
}

#[derive(Args)]
struct StatsArgs {
    /// Graph dump to read (mutually exclusive with --f/--t).
    #[arg(long, conflicts_with_all = ["f", "t", "seed"])]
    input: Option<PathBuf>,
    /// Rate spec for inline generation.
    #[arg(long = "f", requires = "t")]
    f: Option<String>,
    /// Horizon for inline generation.
    #[arg(long, requires = "f")]
    t: Option<u64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Clique search prefix; 0 skips the search. Default: ceil(4 sqrt(t)).
    #[arg(long)]
    clique_prefix: Option<u32>,
    #[arg(long, default_value_t = edgestep_core::stats::DEFAULT_CLIQUE_BUDGET)]
    clique_budget: u64,
    #[arg(long, value_enum, default_value_t = DiameterArg::Auto)]
    diameter: DiameterArg,
    /// Skip triangles, cherries and clustering.
    #[arg(long)]
    no_census: bool,
    /// Vertices (1-based) whose distinct neighbor counts to report.
    #[arg(long, value_delimiter = ',')]
    neighbors: Vec<u64>,
    /// Write the report JSON here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Also write the report as a one-row CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CoupleArgs {
    /// Rate specs, at least two; consecutive pairs are compared.
    #[arg(long = "f", required = true)]
    f: Vec<String>,
    /// Size of the shared trees.
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 100)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Require each spec to dominate its predecessor pointwise on steps
    /// 2..=t; the first violation aborts with exit code 3.
    #[arg(long)]
    assert_order: bool,
    /// Directory receiving couple.csv and couple_summary.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Rate selection shared by the experiment subcommands: an explicit spec or
/// the rv shorthand `--gamma` (with optional `--c`, `--beta`).
#[derive(Args)]
struct RateArgs {
    /// Rate spec (see generate --f).
    #[arg(long = "f", conflicts_with = "gamma")]
    f: Option<String>,
    /// Decay index: shorthand for rv:gamma,c,beta.
    #[arg(long)]
    gamma: Option<f64>,
    /// Prefactor for --gamma.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Log exponent for --gamma.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Log-log slopes of graph statistics across a horizon grid.
    Exponent(ExponentArgs),
    /// Arrival-step concentration band for one vertex rank.
    Tau(TauArgs),
    /// Degree envelope exceedance fractions for one vertex rank.
    Envelope(EnvelopeArgs),
    /// Coupled trajectory difference against the L1 bound.
    Tv(TvArgs),
    /// Monotone statistics under two pointwise-ordered rates.
    Monotone(MonotoneArgs),
    /// Cancellation of the clustering and clique slopes.
    Inverse(InverseArgs),
    /// Chi-square comparison of tree collapse against direct generation.
    CouplingDist(CouplingDistArgs),
    /// Vertex-count concentration band.
    Vcount(VcountArgs),
}

#[derive(Args)]
struct ExponentArgs {
    #[command(flatten)]
    rate: RateArgs,
    /// Statistics to fit: vertex_count, max_degree, simple_edges,
    /// triangles, cherries, global_clustering, clique_size.
    #[arg(long = "stat", value_delimiter = ',', required = true)]
    stats: Vec<String>,
    /// Horizon grid, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [4096u64, 8192, 16384, 32768, 65536, 131072])]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Decay index for the clique prefix rule; defaults to the rate's own.
    #[arg(long)]
    clique_decay: Option<f64>,
    #[arg(long, default_value_t = edgestep_core::stats::DEFAULT_CLIQUE_BUDGET)]
    clique_budget: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Expected slope; needs --tolerance and exactly one --stat.
    #[arg(long, requires = "tolerance", allow_hyphen_values = true)]
    expect: Option<f64>,
    /// Allowed |slope - expect| before the run fails with exit code 4.
    #[arg(long, requires = "expect")]
    tolerance: Option<f64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TauArgs {
    #[command(flatten)]
    rate: RateArgs,
    /// Vertex rank whose arrival step is banded.
    #[arg(long = "i")]
    i: u64,
    /// Band half-width exponent delta.
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 300)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Simulation cutoff as a multiple of the predicted arrival step.
    #[arg(long, default_value_t = 20.0)]
    horizon_factor: f64,
    /// Minimum acceptable hit fraction; below it the run exits with 4.
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EnvelopeArgs {
    #[command(flatten)]
    rate: RateArgs,
    /// Vertex rank whose degree is enveloped.
    #[arg(long = "i")]
    i: u64,
    /// Envelope multipliers, ascending.
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 5.0, 10.0, 25.0])]
    alphas: Vec<f64>,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 300)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Maximum acceptable exceedance fraction at the largest multiplier.
    #[arg(long)]
    ceiling: Option<f64>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TvArgs {
    /// First rate spec.
    #[arg(long = "f")]
    f: String,
    /// Second rate spec.
    #[arg(long = "h")]
    h: String,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MonotoneArgs {
    /// Pointwise lower rate spec.
    #[arg(long = "f")]
    f: String,
    /// Pointwise higher rate spec.
    #[arg(long = "h")]
    h: String,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 500)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct InverseArgs {
    #[command(flatten)]
    rate: RateArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [4096u64, 8192, 16384, 32768, 65536, 131072])]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 20)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    clique_decay: Option<f64>,
    #[arg(long, default_value_t = edgestep_core::stats::DEFAULT_CLIQUE_BUDGET)]
    clique_budget: u64,
    /// Allowed |clustering slope + clique slope|.
    #[arg(long, default_value_t = 0.15)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CouplingDistArgs {
    #[command(flatten)]
    rate: RateArgs,
    #[arg(long, default_value_t = 50)]
    t: u64,
    /// Sample count per method (direct and collapsed).
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
    #[arg(long, default_value_t = 1e-3)]
    significance: f64,
    /// Use the deliberately broken one-hop collapse (negative control).
    #[arg(long)]
    broken: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VcountArgs {
    #[command(flatten)]
    rate: RateArgs,
    #[arg(long)]
    t: u64,
    #[arg(long, default_value_t = 200)]
    replicas: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Minimum acceptable hit fraction; below it the run exits with 4.
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    /// Rate spec to tabulate.
    #[arg(long = "f")]
    f: String,
    /// Steps (and thresholds) at which to evaluate, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<u64>,
    /// Directory receiving profile.csv; omitted means stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<ToleranceFailure>() {
        return 4;
    }
    if err.is::<OrderViolation>() {
        return 3;
    }
    if err.is::<UsageError>() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Domain(_)) => 2,
        Some(Error::Config(_)) => 3,
        Some(_) => 1,
        None => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(args) => commands::generate(&args),
        Command::Stats(args) => commands::stats(&args),
        Command::Couple(args) => commands::couple(&args),
        Command::Experiment(experiment) => commands::experiment(&experiment),
        Command::Profile(args) => commands::profile(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
