use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod farm;

use farm::FarmArg;

#[derive(Parser)]
#[command(name = "linkspam", version, about = "Link-farm detection on web graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load an edge list and print page, edge and domain counts.
    Ingest {
        #[arg(long)]
        edges: PathBuf,
    },
    /// Rank, extract features, cluster and run the domain detector.
    Detect(DetectArgs),
    /// Score a detect run against ground-truth labels.
    Evaluate(EvaluateArgs),
    /// Cross-validated cost-sensitive tree over a list of cost ratios.
    Sweep(SweepArgs),
    /// Write the domain graph as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        edges: PathBuf,
        /// Domain labels (TSV) used to highlight spam domains.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labelled synthetic corpus.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Debug)]
pub struct RankArgs {
    /// Teleport probability.
    #[arg(long, default_value_t = 0.15)]
    pub alpha: f64,
    /// L1 convergence tolerance for PageRank and HITS.
    #[arg(long, default_value_t = 1e-8)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Supporter search depth.
    #[arg(long, default_value_t = linkspam::features::DEFAULT_SUPPORTER_DEPTH)]
    pub depth: usize,
}

#[derive(Args, Clone, Debug)]
pub struct DetectArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[command(flatten)]
    pub rank: RankArgs,
    /// Number of fuzzy clusters.
    #[arg(long, default_value_t = 2)]
    pub clusters: usize,
    #[arg(long, default_value_t = 2.0)]
    pub fuzzifier: f64,
    /// Max membership change at which clustering stops.
    #[arg(long, default_value_t = 1e-6)]
    pub fcm_epsilon: f64,
    #[arg(long, default_value_t = 300)]
    pub fcm_max_iter: usize,
    /// Extra traversal levels beyond the first out-hop.
    #[arg(long, default_value_t = 2)]
    pub tra_lvl: usize,
    /// Minimum IN/OUT intersection for a spam verdict.
    #[arg(long, default_value_t = 3)]
    pub tv: usize,
    /// Also write cluster-smoothed verdicts.
    #[arg(long)]
    pub group: bool,
    #[arg(long, default_value_t = 0.7)]
    pub tau_hi: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau_lo: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct EvaluateArgs {
    /// Directory written by `detect`.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Cost ratio for the feature-based tree.
    #[arg(long, default_value_t = 1.0)]
    pub cost_ratio: f64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.7)]
    pub tau_hi: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tau_lo: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; defaults to the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[command(flatten)]
    pub rank: RankArgs,
    #[arg(long, value_delimiter = ',', default_values_t = linkspam::classifier::DEFAULT_COST_RATIOS)]
    pub cost_ratios: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 5)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 500)]
    pub honest: usize,
    /// Pages per honest domain as MIN:MAX.
    #[arg(long, default_value = "1:5")]
    pub pages: String,
    /// Attachment edges per new honest domain.
    #[arg(long, default_value_t = 2)]
    pub attachment: usize,
    /// clique:DOMAINS[:PAGES[:BOOST]] or bipartite:HUBS:AUTHS[:PAGES[:BOOST]]; repeatable.
    #[arg(long = "farm")]
    pub farms: Vec<FarmArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest { edges } => commands::ingest(&edges),
        Command::Detect(args) => commands::detect(&args),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::ExportDot { edges, labels, out } => commands::export_dot(&edges, labels.as_deref(), out.as_deref()),
        Command::Synth(args) => commands::synth(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
