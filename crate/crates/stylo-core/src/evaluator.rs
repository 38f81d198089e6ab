//! The ranking evaluation protocol over ground-truth pairs.
//!
//! Each query account is ranked against every candidate account on the other
//! platform; the evaluation reports the fraction of queries whose true match
//! comes first (accuracy), the mean 1-based rank of the true match, and a
//! 20-bin rank-percentile histogram. A seeded 1-of-k task mirrors the small
//! matching task given to human judges.
//!
//! Ties break by ascending candidate id, deterministically, rather than by
//! mid-rank averaging; a constant scorer therefore lands the true match at a
//! position set by id order, which is uniform when ids carry no signal.
//!
//! Queries are independent and fan out across threads; results merge ordered
//! by query id, so reports are identical regardless of thread count.

use std::collections::HashSet;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AccountCorpus, GroundTruthPair, Platform};
use crate::similarity::{
    CandidateScorer, Measure, Mode, Polarity, ScoreParams, ScoredPair, Scorer, SimilarityError,
};

/// Number of rank-percentile bins (5% each).
pub const PERCENTILE_BINS: usize = 20;

/// Default candidate-list size for [`one_of_k_task`].
pub const ONE_OF_K_DEFAULT_K: usize = 10;

/// Default query count for [`one_of_k_task`].
pub const ONE_OF_K_DEFAULT_QUERIES: usize = 100;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error("true match {0:?} is not among the scored candidates")]
    TrueMatchMissing(String),
    #[error("no scores to rank")]
    EmptyScores,
    #[error("no covered pairs to evaluate")]
    NoCoveredPairs,
    #[error("need {needed} covered pairs for this task, have {available}")]
    InsufficientPairs { needed: usize, available: usize },
}

/// Which side queries come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AToB,
    BToA,
    /// Run both directions and pool the per-query results.
    Both,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AToB => "a-to-b",
            Direction::BToA => "b-to-a",
            Direction::Both => "both",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a-to-b" => Ok(Direction::AToB),
            "b-to-a" => Ok(Direction::BToA),
            "both" => Ok(Direction::Both),
            other => Err(format!(
                "unknown direction {other:?} (expected a-to-b, b-to-a, or both)"
            )),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the true match landed for one query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingResult {
    pub query_account_id: String,
    pub true_match_id: String,
    /// 1-based position of the true match after sorting.
    pub rank: usize,
    /// Number of candidates ranked against.
    pub candidate_count: usize,
}

/// Aggregated evaluation of one (measure, mode) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub measure: String,
    pub mode: String,
    pub direction: Direction,
    /// Ground-truth pairs whose accounts both survived filtering.
    pub evaluated_pairs: usize,
    /// User ids of pairs excluded because an account was filtered out.
    pub uncovered_pairs: Vec<String>,
    /// Fraction of queries with rank 1.
    pub accuracy: f64,
    pub average_rank: f64,
    /// 20 bins of 5% rank-percentile each, as fractions summing to 1.
    pub percentile_histogram: Vec<f64>,
    pub results: Vec<RankingResult>,
}

/// Sorts scores by the measure's polarity (ties by ascending candidate id)
/// and locates the true match.
pub fn rank_candidates(
    scores: &[ScoredPair],
    true_match_id: &str,
) -> Result<RankingResult, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyScores);
    }
    let polarity = scores[0].polarity;
    let mut order: Vec<&ScoredPair> = scores.iter().collect();
    order.sort_by(|x, y| {
        let by_score = match polarity {
            Polarity::LowerIsSimilar => x.score.total_cmp(&y.score),
            Polarity::HigherIsSimilar => y.score.total_cmp(&x.score),
        };
        by_score.then_with(|| x.candidate_account_id.cmp(&y.candidate_account_id))
    });
    let position = order
        .iter()
        .position(|p| p.candidate_account_id == true_match_id)
        .ok_or_else(|| EvalError::TrueMatchMissing(true_match_id.to_owned()))?;
    Ok(RankingResult {
        query_account_id: scores[0].query_account_id.clone(),
        true_match_id: true_match_id.to_owned(),
        rank: position + 1,
        candidate_count: scores.len(),
    })
}

/// 20-bin rank-percentile histogram as fractions.
///
/// A result with rank `r` of `N` falls in bin `ceil(20 r / N)`. Returns all
/// zeros for an empty result list.
pub fn percentile_histogram(results: &[RankingResult]) -> Vec<f64> {
    let mut bins = vec![0.0f64; PERCENTILE_BINS];
    if results.is_empty() {
        return bins;
    }
    for result in results {
        let bin = (PERCENTILE_BINS * result.rank).div_ceil(result.candidate_count);
        bins[bin.clamp(1, PERCENTILE_BINS) - 1] += 1.0;
    }
    let total = results.len() as f64;
    for bin in &mut bins {
        *bin /= total;
    }
    bins
}

/// A covered pair: both accounts survived filtering.
struct CoveredPair<'a> {
    pair: &'a GroundTruthPair,
}

fn split_coverage<'a>(
    pairs: &'a [GroundTruthPair],
    accounts: &[AccountCorpus],
) -> (Vec<CoveredPair<'a>>, Vec<String>) {
    let present: HashSet<(Platform, &str)> = accounts
        .iter()
        .map(|a| (a.platform, a.account_id.as_str()))
        .collect();
    let mut covered = Vec::new();
    let mut uncovered = Vec::new();
    for pair in pairs {
        if present.contains(&(Platform::A, pair.account_id_a.as_str()))
            && present.contains(&(Platform::B, pair.account_id_b.as_str()))
        {
            covered.push(CoveredPair { pair });
        } else {
            uncovered.push(pair.user_id.clone());
        }
    }
    (covered, uncovered)
}

/// Runs the full ranking protocol with an already-prepared scorer.
///
/// For each covered pair the query is its account on the source platform and
/// the candidates are all covered accounts on the target platform. Uncovered
/// pairs are excluded from every denominator and listed in the report.
pub fn evaluate_with(
    pairs: &[GroundTruthPair],
    accounts: &[AccountCorpus],
    scorer: &dyn CandidateScorer,
    direction: Direction,
    measure_label: &str,
    mode_label: &str,
) -> Result<MatchReport, EvalError> {
    let (covered, uncovered) = split_coverage(pairs, accounts);
    if covered.is_empty() {
        return Err(EvalError::NoCoveredPairs);
    }

    let mut all_results: Vec<RankingResult> = Vec::new();
    let passes: &[bool] = match direction {
        Direction::AToB => &[true],
        Direction::BToA => &[false],
        Direction::Both => &[true, false],
    };
    for &from_a in passes {
        let mut candidates: Vec<String> = covered
            .iter()
            .map(|c| {
                if from_a {
                    c.pair.account_id_b.clone()
                } else {
                    c.pair.account_id_a.clone()
                }
            })
            .collect();
        candidates.sort_unstable();
        let queries: Vec<(&str, &str)> = covered
            .iter()
            .map(|c| {
                if from_a {
                    (c.pair.account_id_a.as_str(), c.pair.account_id_b.as_str())
                } else {
                    (c.pair.account_id_b.as_str(), c.pair.account_id_a.as_str())
                }
            })
            .collect();
        let mut results = queries
            .par_iter()
            .map(|(query_id, true_match)| {
                let scores = scorer.score_candidates(query_id, &candidates)?;
                rank_candidates(&scores, true_match)
            })
            .collect::<Result<Vec<RankingResult>, EvalError>>()?;
        results.sort_by(|x, y| x.query_account_id.cmp(&y.query_account_id));
        all_results.extend(results);
    }

    let total = all_results.len() as f64;
    let accuracy = all_results.iter().filter(|r| r.rank == 1).count() as f64 / total;
    let average_rank = all_results.iter().map(|r| r.rank as f64).sum::<f64>() / total;
    let percentile_histogram = percentile_histogram(&all_results);
    Ok(MatchReport {
        measure: measure_label.to_owned(),
        mode: mode_label.to_owned(),
        direction,
        evaluated_pairs: covered.len(),
        uncovered_pairs: uncovered,
        accuracy,
        average_rank,
        percentile_histogram,
        results: all_results,
    })
}

/// Prepares a [`Scorer`] for `(measure, mode)` and runs [`evaluate_with`].
pub fn evaluate(
    pairs: &[GroundTruthPair],
    accounts: &[AccountCorpus],
    measure: Measure,
    mode: Mode,
    params: ScoreParams,
    direction: Direction,
) -> Result<MatchReport, EvalError> {
    let scorer = Scorer::new(accounts, measure, mode, params)?;
    evaluate_with(
        pairs,
        accounts,
        &scorer,
        direction,
        measure.as_str(),
        mode.as_str(),
    )
}

/// The 1-of-k matching task: `n` random queries, each ranked against its true
/// match plus `k - 1` random distractors. Returns the fraction answered
/// correctly. Deterministic in `seed`.
pub fn one_of_k_task(
    pairs: &[GroundTruthPair],
    accounts: &[AccountCorpus],
    scorer: &dyn CandidateScorer,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<f64, EvalError> {
    let (covered, _) = split_coverage(pairs, accounts);
    let needed = n.max(k);
    if covered.len() < needed || k < 2 || n == 0 {
        return Err(EvalError::InsufficientPairs {
            needed: needed.max(2),
            available: covered.len(),
        });
    }
    let mut ordered: Vec<&GroundTruthPair> = covered.iter().map(|c| c.pair).collect();
    ordered.sort_by(|x, y| x.user_id.cmp(&y.user_id));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let query_picks = rand::seq::index::sample(&mut rng, ordered.len(), n);
    let mut correct = 0usize;
    for query_idx in query_picks {
        let pair = ordered[query_idx];
        let mut candidates: Vec<String> = vec![pair.account_id_b.clone()];
        let distractor_picks = rand::seq::index::sample(&mut rng, ordered.len() - 1, k - 1);
        for pick in distractor_picks {
            let idx = if pick < query_idx { pick } else { pick + 1 };
            candidates.push(ordered[idx].account_id_b.clone());
        }
        let scores = scorer.score_candidates(&pair.account_id_a, &candidates)?;
        let result = rank_candidates(&scores, &pair.account_id_b)?;
        if result.rank == 1 {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

/// Scores every candidate by a hash of `(seed, query, candidate)`: uniform,
/// deterministic, and stateless, so it is safe under any evaluation order.
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    pub seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn score(&self, query: &str, candidate: &str) -> f64 {
        // FNV-1a over the seed and both ids, then a splitmix64 finalizer.
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(&self.seed.to_le_bytes());
        eat(query.as_bytes());
        eat(&[0xff]);
        eat(candidate.as_bytes());
        let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl CandidateScorer for RandomScorer {
    fn score_candidates(
        &self,
        query_id: &str,
        candidate_ids: &[String],
    ) -> Result<Vec<ScoredPair>, SimilarityError> {
        Ok(candidate_ids
            .iter()
            .map(|candidate| ScoredPair {
                query_account_id: query_id.to_owned(),
                candidate_account_id: candidate.clone(),
                score: self.score(query_id, candidate),
                polarity: Polarity::HigherIsSimilar,
            })
            .collect())
    }
}

/// Scores every candidate identically; ranks collapse to the id tie-break.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantScorer;

impl CandidateScorer for ConstantScorer {
    fn score_candidates(
        &self,
        query_id: &str,
        candidate_ids: &[String],
    ) -> Result<Vec<ScoredPair>, SimilarityError> {
        Ok(candidate_ids
            .iter()
            .map(|candidate| ScoredPair {
                query_account_id: query_id.to_owned(),
                candidate_account_id: candidate.clone(),
                score: 0.0,
                polarity: Polarity::HigherIsSimilar,
            })
            .collect())
    }
}
