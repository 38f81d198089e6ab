//! The four subcommands. Every command reads inputs, writes only under the
//! output directory, and is deterministic for a fixed config and seed.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::{Deserialize, Serialize};

use stylo_core::corpus::{
    build_accounts, corpus_stats, load_ground_truth_file, parse_posts_file, write_ground_truth,
    write_posts, AccountCorpus, GroundTruthPair, Platform, PlatformStats,
};
use stylo_core::evaluator::{evaluate_with, Direction, MatchReport};
use stylo_core::similarity::{CandidateScorer, Scorer};
use stylo_core::synth::{generate, GeneratorSpec};

use crate::config::RunConfig;
use crate::CliError;

fn data(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Data(e.into())
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("creating output directory {}", config.out_dir.display()))
        .map_err(CliError::Data)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(CliError::Data)
}

#[derive(Debug, Serialize, Deserialize)]
struct IngestReport {
    parsed_posts: usize,
    rejected_lines: usize,
    surviving_posts: usize,
    accounts: usize,
    histogram_bins: usize,
    platform_a: Option<PlatformStats>,
    platform_b: Option<PlatformStats>,
}

pub fn ingest(config: &RunConfig) -> Result<(), CliError> {
    let posts_path = config.posts_path()?;
    let window = config.window()?;
    let parsed = parse_posts_file(posts_path)
        .with_context(|| format!("reading posts file {}", posts_path.display()))
        .map_err(CliError::Data)?;
    let parsed_posts = parsed.posts.len();
    let rejected_lines = parsed.rejections.len();
    for rejection in parsed.rejections.iter().take(5) {
        eprintln!("rejected line {}: {}", rejection.line, rejection.reason);
    }
    if rejected_lines > 5 {
        eprintln!("... {} rejected lines total", rejected_lines);
    }

    let accounts = build_accounts(parsed.posts, window, config.min_posts).map_err(data)?;
    let surviving_posts = accounts.iter().map(AccountCorpus::post_count).sum();
    let (platform_a, platform_b) = if accounts.is_empty() {
        (None, None)
    } else {
        let stats = corpus_stats(&accounts, config.stats_bins).map_err(data)?;
        (stats.platform_a, stats.platform_b)
    };
    let report = IngestReport {
        parsed_posts,
        rejected_lines,
        surviving_posts,
        accounts: accounts.len(),
        histogram_bins: config.stats_bins,
        platform_a,
        platform_b,
    };

    ensure_out_dir(config)?;
    let stats_path = config.out_dir.join("stats.json");
    let mut json = serde_json::to_string_pretty(&report).expect("serializable report");
    json.push('\n');
    write_file(&stats_path, json.as_bytes())?;

    println!(
        "parsed {parsed_posts} posts ({rejected_lines} rejected lines); {} accounts with >= {} posts in window",
        report.accounts, config.min_posts
    );
    for (platform, stats) in [("A", &report.platform_a), ("B", &report.platform_b)] {
        if let Some(s) = stats {
            println!(
                "platform {platform}: {} accounts, posts/account mean {:.1}, median {}, max {}, min {}",
                s.accounts, s.mean, s.median, s.maximum, s.minimum
            );
        }
    }
    println!("wrote {}", stats_path.display());
    Ok(())
}

pub fn gen_synth(config: &RunConfig, spec_path: &Path, seed_flag: Option<u64>) -> Result<(), CliError> {
    let text = fs::read_to_string(spec_path)
        .with_context(|| format!("reading generator spec {}", spec_path.display()))
        .map_err(CliError::Data)?;
    let mut table: toml::Table = toml::from_str(&text)
        .with_context(|| format!("parsing generator spec {}", spec_path.display()))
        .map_err(CliError::Data)?;
    if let Some(seed) = seed_flag {
        let seed = i64::try_from(seed)
            .map_err(|_| CliError::Usage(anyhow!("--seed {seed} does not fit a TOML integer")))?;
        table.insert("seed".to_owned(), toml::Value::Integer(seed));
    }
    let spec: GeneratorSpec = table
        .try_into()
        .context("invalid generator spec (a `seed` is mandatory for reproducibility)")
        .map_err(CliError::Data)?;
    let corpus = generate(&spec).map_err(data)?;

    ensure_out_dir(config)?;
    let posts_path = config.out_dir.join("posts.jsonl");
    let truth_path = config.out_dir.join("ground_truth.csv");
    let mut posts_bytes = Vec::new();
    write_posts(&mut posts_bytes, &corpus.posts).map_err(data)?;
    write_file(&posts_path, &posts_bytes)?;
    let mut truth_bytes = Vec::new();
    write_ground_truth(&mut truth_bytes, &corpus.pairs).map_err(data)?;
    write_file(&truth_path, &truth_bytes)?;

    println!(
        "generated {} users ({} posts) with seed {}",
        corpus.pairs.len(),
        corpus.posts.len(),
        spec.seed
    );
    println!("wrote {}", posts_path.display());
    println!("wrote {}", truth_path.display());
    Ok(())
}

struct SummaryRow {
    measure: String,
    mode: String,
    accuracy: f64,
    average_rank: f64,
    evaluated_pairs: usize,
    uncovered_pairs: usize,
}

pub fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let posts_path = config.posts_path()?;
    let truth_path = config.ground_truth_path()?;
    let window = config.window()?;
    let params = config.score_params()?;
    if config.measures.is_empty() || config.modes.is_empty() {
        return Err(CliError::Usage(anyhow!(
            "need at least one measure and one mode"
        )));
    }

    let parsed = parse_posts_file(posts_path)
        .with_context(|| format!("reading posts file {}", posts_path.display()))
        .map_err(CliError::Data)?;
    if !parsed.rejections.is_empty() {
        eprintln!("{} rejected lines in {}", parsed.rejections.len(), posts_path.display());
    }
    let pairs = load_ground_truth_file(truth_path)
        .with_context(|| format!("reading ground truth {}", truth_path.display()))
        .map_err(CliError::Data)?;
    let accounts = build_accounts(parsed.posts, window, config.min_posts).map_err(data)?;

    if config.jobs > 0 {
        // Ignore failure: the global pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build_global();
    }

    ensure_out_dir(config)?;
    let mut rows: Vec<SummaryRow> = Vec::new();
    for &mode in &config.modes {
        for &measure in &config.measures {
            let scorer = Scorer::new(&accounts, measure, mode, params).map_err(data)?;
            let report = evaluate_with(
                &pairs,
                &accounts,
                &scorer,
                config.direction,
                measure.as_str(),
                mode.as_str(),
            )
            .map_err(data)?;

            let stem = format!("{}_{}", measure.as_str(), mode.as_str());
            let report_path = config.out_dir.join(format!("report_{stem}.json"));
            let mut json = serde_json::to_string_pretty(&report).expect("serializable report");
            json.push('\n');
            write_file(&report_path, json.as_bytes())?;
            write_histogram(&config.out_dir.join(format!("histogram_{stem}.csv")), &report)?;
            if config.dump_scores {
                dump_scores(
                    &config.out_dir.join(format!("scores_{stem}.csv")),
                    &scorer,
                    &pairs,
                    &accounts,
                    config.direction,
                    measure.as_str(),
                    mode.as_str(),
                )?;
            }
            rows.push(SummaryRow {
                measure: measure.as_str().to_owned(),
                mode: mode.as_str().to_owned(),
                accuracy: report.accuracy,
                average_rank: report.average_rank,
                evaluated_pairs: report.evaluated_pairs,
                uncovered_pairs: report.uncovered_pairs.len(),
            });
        }
    }

    rows.sort_by(|x, y| {
        y.accuracy
            .total_cmp(&x.accuracy)
            .then_with(|| x.measure.cmp(&y.measure))
            .then_with(|| x.mode.cmp(&y.mode))
    });
    write_summary(&config.out_dir.join("summary.csv"), &rows)?;

    println!(
        "{:<10} {:<11} {:>9} {:>13} {:>6} {:>10}",
        "measure", "mode", "accuracy", "average_rank", "pairs", "uncovered"
    );
    for row in &rows {
        println!(
            "{:<10} {:<11} {:>9.4} {:>13.2} {:>6} {:>10}",
            row.measure, row.mode, row.accuracy, row.average_rank, row.evaluated_pairs,
            row.uncovered_pairs
        );
    }
    println!("wrote {}", config.out_dir.join("summary.csv").display());
    Ok(())
}

fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), CliError> {
    let mut out = String::from("measure,mode,accuracy,average_rank,evaluated_pairs,uncovered_pairs\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{},{}\n",
            row.measure, row.mode, row.accuracy, row.average_rank, row.evaluated_pairs,
            row.uncovered_pairs
        ));
    }
    write_file(path, out.as_bytes())
}

fn write_histogram(path: &Path, report: &MatchReport) -> Result<(), CliError> {
    let mut out = String::from("bin,lower_percentile,upper_percentile,fraction\n");
    for (i, fraction) in report.percentile_histogram.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{:.6}\n",
            i + 1,
            5 * i,
            5 * (i + 1),
            fraction
        ));
    }
    write_file(path, out.as_bytes())
}

/// Raw pairwise scores as "query_id,candidate_id,measure,mode,score" rows,
/// queries in sorted order, candidates in sorted order.
fn dump_scores(
    path: &Path,
    scorer: &Scorer,
    pairs: &[GroundTruthPair],
    accounts: &[AccountCorpus],
    direction: Direction,
    measure: &str,
    mode: &str,
) -> Result<(), CliError> {
    let present: HashSet<(Platform, &str)> = accounts
        .iter()
        .map(|a| (a.platform, a.account_id.as_str()))
        .collect();
    let covered: Vec<&GroundTruthPair> = pairs
        .iter()
        .filter(|p| {
            present.contains(&(Platform::A, p.account_id_a.as_str()))
                && present.contains(&(Platform::B, p.account_id_b.as_str()))
        })
        .collect();

    let mut out = Vec::new();
    writeln!(out, "query_id,candidate_id,measure,mode,score").expect("vec write");
    let passes: &[bool] = match direction {
        Direction::AToB => &[true],
        Direction::BToA => &[false],
        Direction::Both => &[true, false],
    };
    for &from_a in passes {
        let mut queries: Vec<&str> = covered
            .iter()
            .map(|p| {
                if from_a {
                    p.account_id_a.as_str()
                } else {
                    p.account_id_b.as_str()
                }
            })
            .collect();
        queries.sort_unstable();
        let mut candidates: Vec<String> = covered
            .iter()
            .map(|p| {
                if from_a {
                    p.account_id_b.clone()
                } else {
                    p.account_id_a.clone()
                }
            })
            .collect();
        candidates.sort_unstable();
        for query in queries {
            let scores = scorer.score_candidates(query, &candidates).map_err(data)?;
            for pair in scores {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    pair.query_account_id, pair.candidate_account_id, measure, mode, pair.score
                )
                .expect("vec write");
            }
        }
    }
    write_file(path, &out)
}

pub fn report(config: &RunConfig) -> Result<(), CliError> {
    let dir = &config.out_dir;
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading report directory {}", dir.display()))
        .map_err(CliError::Data)?;
    let mut reports: Vec<MatchReport> = Vec::new();
    let mut names: Vec<std::path::PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("report_") && n.ends_with(".json"))
        })
        .collect();
    names.sort();
    for path in names {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(CliError::Data)?;
        let report: MatchReport = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(CliError::Data)?;
        reports.push(report);
    }
    if reports.is_empty() {
        return Err(CliError::Data(anyhow!(
            "no report_*.json files in {}",
            dir.display()
        )));
    }
    reports.sort_by(|x, y| y.accuracy.total_cmp(&x.accuracy));

    println!(
        "{:<10} {:<11} {:<9} {:>9} {:>13} {:>6} {:>10}",
        "measure", "mode", "direction", "accuracy", "average_rank", "pairs", "uncovered"
    );
    for report in &reports {
        println!(
            "{:<10} {:<11} {:<9} {:>9.4} {:>13.2} {:>6} {:>10}",
            report.measure,
            report.mode,
            report.direction.as_str(),
            report.accuracy,
            report.average_rank,
            report.evaluated_pairs,
            report.uncovered_pairs.len()
        );
    }
    println!();
    for report in &reports {
        let cells: Vec<String> = report
            .percentile_histogram
            .iter()
            .map(|f| format!("{:.0}", f * 100.0))
            .collect();
        println!(
            "{} {} rank-percentile %: [{}]",
            report.measure,
            report.mode,
            cells.join(" ")
        );
    }
    Ok(())
}
