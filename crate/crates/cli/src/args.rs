//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Names of the subcommands (used when merging config files).
pub const SUBCOMMANDS: [&str; 6] = [
    "gen-trace",
    "build-graphs",
    "detect-groups",
    "detect-approach",
    "rpp",
    "report",
];

#[derive(Parser, Debug)]
#[command(
    name = "situ",
    version,
    about = "Situation detection over video object traces",
    args_override_self = true
)]
pub struct Cli {
    /// JSON file supplying flag values (command-line flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Maximum number of member graphs analysed concurrently [default: all cores].
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic trace (RDF) and its ground truth.
    #[command(args_override_self = true)]
    GenTrace(GenTraceArgs),
    /// Build graph model files and the indexed data file from a trace.
    #[command(args_override_self = true)]
    BuildGraphs(BuildArgs),
    /// Detect groups of objects of a queried size.
    #[command(args_override_self = true)]
    DetectGroups(GroupArgs),
    /// Detect pairs of objects moving closer (or apart).
    #[command(args_override_self = true)]
    DetectApproach(ApproachArgs),
    /// Run relational operators (group-by-as-sequence, compression, joins, direction).
    #[command(args_override_self = true)]
    Rpp(RppArgs),
    /// Compare a candidate result with a baseline result.
    #[command(args_override_self = true)]
    Report(ReportArgs),
}

/// Output format of reports printed to standard output.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// Built-in scenario families.
#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Random small clusters walking together, with jitter and misses.
    RandomGroups,
    /// Noise-free groups drifting rigidly.
    StableGroups,
    /// One stationary group of three among six objects.
    OneGroup,
    /// A group of eight present in a short window only.
    SparseGroup,
    /// Windows in which planted pairs approach, retreat or stay still.
    PairEvents,
    /// Independently wandering objects.
    Wanderers,
}

#[derive(Args, Debug)]
pub struct GenTraceArgs {
    /// Scenario description (JSON).
    #[arg(long, value_name = "FILE", conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    /// Built-in scenario family instead of a scenario file.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Frame count for presets.
    #[arg(long, default_value_t = 900)]
    pub frames: u64,
    /// Object count for presets that take one.
    #[arg(long, default_value_t = 8)]
    pub objects: usize,
    /// Window count for the pair-events preset.
    #[arg(long, default_value_t = 4)]
    pub windows: u64,
    /// Position jitter (pixels) for the pair-events preset.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Output directory.
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
    /// File stem [default: scenario file stem or preset name].
    #[arg(long)]
    pub stem: Option<String>,
    /// Also write the scenario description used.
    #[arg(long, value_name = "FILE")]
    pub save_spec: Option<PathBuf>,
}

/// Partitioned-model parameters shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct MgvArgs {
    /// Quantity the member graphs are balanced on.
    #[arg(long, default_value = "node", value_parser = ["node", "frame"])]
    pub balance_by: String,
    /// Upper bound on the number of member graphs [default: 4 when neither bound is given].
    #[arg(long, value_name = "N", conflicts_with = "min_graph_size", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_graph: Option<u64>,
    /// Smallest member-graph size (nodes or frames, per --balance-by).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub min_graph_size: Option<u64>,
    /// Flush horizon in frames [default: the trace's tracker horizon].
    #[arg(long, value_name = "FRAMES")]
    pub th_track: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    /// Input trace.
    #[arg(long, value_name = "FILE")]
    pub rdf: PathBuf,
    /// Model(s) to build: sgf, sgv, mgv or all.
    #[arg(long, default_value = "all")]
    pub model: String,
    /// Edge label kind: distance, min-max-distance or bbox-spatial.
    #[arg(long)]
    pub edge_type: Option<String>,
    #[command(flatten)]
    pub mgv: MgvArgs,
    /// Output directory.
    #[arg(long, default_value = ".", value_name = "DIR")]
    pub out: PathBuf,
    /// File stem [default: trace file stem].
    #[arg(long)]
    pub stem: Option<String>,
}

/// Where detection inputs come from.
#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Trace to analyse; models are built in memory.
    #[arg(long, value_name = "FILE", required_unless_present = "models", conflicts_with = "models")]
    pub rdf: Option<PathBuf>,
    /// Directory of previously built model files.
    #[arg(long, value_name = "DIR")]
    pub models: Option<PathBuf>,
    /// Stem of the model files in --models [default: the only data file there].
    #[arg(long)]
    pub stem: Option<String>,
}

/// Output options shared by the detection subcommands.
#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the detected result (JSON) here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Write the report (JSON) here.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Format of the report printed to standard output.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Graph model to traverse: sgf, sgv or mgv.
    #[arg(long, default_value = "sgv")]
    pub model: String,
    /// Algorithm: ho (histogram), gc (heuristic clustering), vt (vertex traversal)
    /// or baseline [default: ho on sgf, vt otherwise].
    #[arg(long)]
    pub algorithm: Option<String>,
    /// Queried group size.
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    /// Size bound: exact, star, max or an upper size.
    #[arg(long, default_value = "max")]
    pub p: String,
    /// Re-clustering trigger for gc: jd, cq or cs.
    #[arg(long, default_value = "cs")]
    pub heuristic: String,
    /// Threshold of the jd/cq trigger.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Dropped-frame budget factor (budget = alpha × fps).
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Only consider objects of this class.
    #[arg(long, value_name = "LABEL")]
    pub class: Option<String>,
    /// Baseline to compare with: none, sgf, sgv-vt or mgv-vt.
    #[arg(long, default_value = "none")]
    pub baseline: String,
    /// Compare with a stored result instead of computing a baseline.
    #[arg(long, value_name = "FILE", conflicts_with = "baseline")]
    pub baseline_file: Option<PathBuf>,
    #[command(flatten)]
    pub mgv: MgvArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ApproachArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Graph model to traverse: sgf, sgv or mgv.
    #[arg(long, default_value = "sgv")]
    pub model: String,
    /// Trend to report: closer or apart.
    #[arg(long, default_value = "closer")]
    pub direction: String,
    /// Minimum distance change per step (pixels).
    #[arg(long, default_value_t = situ_core::approach::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Sampling stride: half_fps, fps, adaptive_half, adaptive_full or a number.
    #[arg(long, default_value = "adaptive_half")]
    pub k: String,
    /// Only consider objects of this class.
    #[arg(long, value_name = "LABEL")]
    pub class: Option<String>,
    /// Model to compute a comparison result on: none, sgf, sgv or mgv.
    #[arg(long, default_value = "none")]
    pub baseline: String,
    /// Ground truth of a synthetic trace; planted counts are added to the report.
    #[arg(long, value_name = "FILE")]
    pub ground_truth: Option<PathBuf>,
    #[command(flatten)]
    pub mgv: MgvArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RppArgs {
    /// Input relation (JSON).
    #[arg(long, value_name = "FILE", required_unless_present = "rdf", conflicts_with = "rdf")]
    pub relation: Option<PathBuf>,
    /// Input trace, one row per detection.
    #[arg(long, value_name = "FILE")]
    pub rdf: Option<PathBuf>,
    /// Group-by column; turns the relation into sequences.
    #[arg(long, value_name = "COLUMN", requires = "aoa")]
    pub gba: Option<String>,
    /// Ordering column of the sequences.
    #[arg(long, value_name = "COLUMN", requires = "gba")]
    pub aoa: Option<String>,
    /// Compress sequences to first, last or both end elements.
    #[arg(long, value_name = "OPTION")]
    pub cct: Option<String>,
    /// Right-hand relation (JSON) to join with.
    #[arg(long, value_name = "FILE", conflicts_with = "join_rdf")]
    pub join_relation: Option<PathBuf>,
    /// Right-hand trace to join with.
    #[arg(long, value_name = "FILE")]
    pub join_rdf: Option<PathBuf>,
    /// Left join column.
    #[arg(long, default_value = "fv", value_name = "COLUMN")]
    pub on: String,
    /// Right join column [default: same as --on].
    #[arg(long, value_name = "COLUMN")]
    pub right_on: Option<String>,
    /// Similarity metric: cosine or euclidean.
    #[arg(long, default_value = "cosine")]
    pub metric: String,
    /// Similarity threshold.
    #[arg(long, default_value_t = 0.3)]
    pub th: f64,
    /// Comparison between distance and threshold: <, <=, > or >=.
    #[arg(long, default_value = "<=")]
    pub op: String,
    /// Report each group's direction of travel from this box column.
    #[arg(long, value_name = "COLUMN")]
    pub direction: Option<String>,
    /// First sequence position for --direction [default: 1].
    #[arg(long)]
    pub i: Option<usize>,
    /// Second sequence position for --direction [default: last].
    #[arg(long)]
    pub j: Option<usize>,
    /// Displacement (pixels) below which an object counts as stationary.
    #[arg(long, default_value_t = situ_core::rpp::DEFAULT_STATIONARY_EPS)]
    pub eps: f64,
    /// Write the resulting relation here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Candidate result (group or approach JSON).
    #[arg(long, value_name = "FILE")]
    pub candidate: PathBuf,
    /// Baseline result of the same kind.
    #[arg(long, value_name = "FILE")]
    pub baseline: PathBuf,
    /// Report written by the run that produced the candidate.
    #[arg(long, value_name = "FILE")]
    pub candidate_report: Option<PathBuf>,
    /// Report written by the run that produced the baseline.
    #[arg(long, value_name = "FILE")]
    pub baseline_report: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}
