//! `stylo`: batch pipeline for matching accounts across two platforms from
//! post text and post timing.
//!
//! Exit codes are a stable scripting contract: 0 success, 1 usage error
//! (flags, config values), 2 data error (missing or malformed inputs).

mod commands;
mod config;

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

use stylo_core::evaluator::Direction;
use stylo_core::similarity::{Measure, Mode};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration value; exit 1.
    Usage(anyhow::Error),
    /// Missing or malformed input data; exit 2.
    Data(anyhow::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            CliError::Usage(e) | CliError::Data(e) => e,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "stylo",
    version,
    about = "Match accounts across two platforms from post text and timing",
    propagate_version = true
)]
struct Cli {
    /// Declarative run configuration (TOML); flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; every write goes under it.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for anything randomized (synthetic generation, task sampling).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Measure to evaluate; repeat for several (kl2, pp2, tfidf, confusion).
    #[arg(long, global = true, value_name = "MEASURE")]
    measure: Vec<Measure>,

    /// Mode to evaluate; repeat for several (linguistic, temporal, combined).
    #[arg(long, global = true, value_name = "MODE")]
    mode: Vec<Mode>,

    /// Worker threads for the evaluation fan-out; 0 means all cores.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and filter a posts file; write corpus statistics.
    Ingest(IngestArgs),
    /// Generate a synthetic paired corpus from a generator spec.
    GenSynth(GenSynthArgs),
    /// Run the ranking evaluation for every requested (measure, mode).
    Evaluate(EvaluateArgs),
    /// Summarize previously written evaluation reports.
    Report(ReportArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Posts file: one JSON record per line.
    #[arg(long, value_name = "PATH")]
    posts: Option<PathBuf>,

    /// Minimum surviving posts per account.
    #[arg(long, value_name = "N")]
    min_posts: Option<usize>,

    /// Analysis window start (RFC 3339).
    #[arg(long, value_name = "WHEN")]
    window_start: Option<DateTime<Utc>>,

    /// Analysis window end (RFC 3339, exclusive).
    #[arg(long, value_name = "WHEN")]
    window_end: Option<DateTime<Utc>>,

    /// Bin count for the posts-per-account histogram.
    #[arg(long, value_name = "N")]
    bins: Option<usize>,
}

#[derive(Args)]
struct GenSynthArgs {
    /// Generator spec (TOML). A seed is mandatory, in the file or via --seed.
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Posts file: one JSON record per line.
    #[arg(long, value_name = "PATH")]
    posts: Option<PathBuf>,

    /// Ground-truth CSV (user_id,account_id_A,account_id_B).
    #[arg(long, value_name = "PATH")]
    ground_truth: Option<PathBuf>,

    #[arg(long, value_name = "N")]
    min_posts: Option<usize>,

    #[arg(long, value_name = "WHEN")]
    window_start: Option<DateTime<Utc>>,

    #[arg(long, value_name = "WHEN")]
    window_end: Option<DateTime<Utc>>,

    /// Confusion-model Dirichlet prior over users.
    #[arg(long, value_name = "X")]
    alpha: Option<f64>,

    /// Confusion-model Dirichlet prior over words.
    #[arg(long, value_name = "X")]
    beta: Option<f64>,

    /// Query direction: a-to-b, b-to-a, or both.
    #[arg(long, value_name = "DIR")]
    direction: Option<Direction>,

    /// Also write raw pairwise scores per combination.
    #[arg(long)]
    dump_scores: bool,
}

#[derive(Args)]
struct ReportArgs {}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {:#}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if !cli.measure.is_empty() {
        config.measures = cli.measure.clone();
    }
    if !cli.mode.is_empty() {
        config.modes = cli.mode.clone();
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }

    match cli.command {
        Command::Ingest(args) => {
            if let Some(posts) = args.posts {
                config.posts = Some(posts);
            }
            if let Some(min_posts) = args.min_posts {
                config.min_posts = min_posts;
            }
            if let Some(start) = args.window_start {
                config.window_start = start;
            }
            if let Some(end) = args.window_end {
                config.window_end = end;
            }
            if let Some(bins) = args.bins {
                config.stats_bins = bins;
            }
            commands::ingest(&config)
        }
        Command::GenSynth(args) => commands::gen_synth(&config, &args.spec, cli.seed),
        Command::Evaluate(args) => {
            if let Some(posts) = args.posts {
                config.posts = Some(posts);
            }
            if let Some(ground_truth) = args.ground_truth {
                config.ground_truth = Some(ground_truth);
            }
            if let Some(min_posts) = args.min_posts {
                config.min_posts = min_posts;
            }
            if let Some(start) = args.window_start {
                config.window_start = start;
            }
            if let Some(end) = args.window_end {
                config.window_end = end;
            }
            if let Some(alpha) = args.alpha {
                config.alpha = alpha;
            }
            if let Some(beta) = args.beta {
                config.beta = beta;
            }
            if let Some(direction) = args.direction {
                config.direction = direction;
            }
            if args.dump_scores {
                config.dump_scores = true;
            }
            commands::evaluate(&config)
        }
        Command::Report(_) => commands::report(&config),
    }
}
