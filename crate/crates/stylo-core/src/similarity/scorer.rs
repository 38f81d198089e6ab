//! Measure/mode dispatch over a prepared account collection.
//!
//! A [`Scorer`] does all corpus-wide work once at construction (global
//! vocabulary interning, TF-IDF fitting, confusion fitting) and is then a
//! pure, shareable function from a query to scored candidates. The evaluator
//! fans queries out across threads against one `Scorer`.
//!
//! The pairwise measures get a streamed path: each account's counts are held
//! sorted by global vocabulary index, a pair's union vocabulary is a two-
//! pointer merge, and the Witten-Bell sums run directly over that merge. The
//! arithmetic mirrors the model-based [`kl2`]/[`pp2`] functions term for term
//! in the same canonical order, so the two routes agree bit for bit (there is
//! a test for that).

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::corpus::{AccountCorpus, Platform};
use crate::lang_model::{TokenStream, Vocabulary};

use super::confusion::{fit_confusion_documents, ConfusionEstimates};
use super::tfidf::{cosine, tfidf_from_documents, TfidfCollection};
use super::{ConfusionRanking, Measure, Mode, ScoreParams, ScoredPair, SimilarityError};

/// Anything that can rank a query against candidate account ids.
pub trait CandidateScorer: Sync {
    /// One [`ScoredPair`] per candidate, in candidate order.
    fn score_candidates(
        &self,
        query_id: &str,
        candidate_ids: &[String],
    ) -> Result<Vec<ScoredPair>, SimilarityError>;
}

/// Per-account counts sorted by global vocabulary index.
#[derive(Debug, Clone)]
struct SparseCounts {
    ids: Vec<u32>,
    counts: Vec<u64>,
    total: u64,
}

impl SparseCounts {
    fn build(tokens: &TokenStream, vocabulary: &Vocabulary) -> Self {
        let mut map: HashMap<u32, u64> = HashMap::new();
        for token in tokens.iter() {
            let id = vocabulary
                .index_of(token)
                .expect("global vocabulary covers every stream") as u32;
            *map.entry(id).or_insert(0) += 1;
        }
        let mut entries: Vec<(u32, u64)> = map.into_iter().collect();
        entries.sort_unstable_by_key(|&(id, _)| id);
        let total = entries.iter().map(|&(_, c)| c).sum();
        Self {
            ids: entries.iter().map(|&(id, _)| id).collect(),
            counts: entries.iter().map(|&(_, c)| c).collect(),
            total,
        }
    }
}

/// One side's Witten-Bell parameters over a pairwise union vocabulary.
struct WbSide {
    n: f64,
    t: f64,
    z: f64,
}

impl WbSide {
    fn over_union(side: &SparseCounts, union_len: usize) -> Self {
        Self {
            n: side.total as f64,
            t: side.ids.len() as f64,
            z: (union_len - side.ids.len()) as f64,
        }
    }

    fn prob(&self, count: u64) -> f64 {
        let c = count as f64;
        if self.z == 0.0 {
            return c / self.n;
        }
        if count > 0 {
            c / (self.n + self.t)
        } else {
            self.t / (self.z * (self.n + self.t))
        }
    }
}

fn union_len(a: &SparseCounts, b: &SparseCounts) -> usize {
    let (mut i, mut j, mut len) = (0usize, 0usize, 0usize);
    while i < a.ids.len() && j < b.ids.len() {
        match a.ids[i].cmp(&b.ids[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        len += 1;
    }
    len + (a.ids.len() - i) + (b.ids.len() - j)
}

/// `(kl2, pp2)` for one pair, streamed over the merged union vocabulary.
fn kl2_pp2_streamed(a: &SparseCounts, b: &SparseCounts) -> (f64, f64) {
    let union = union_len(a, b);
    let wa = WbSide::over_union(a, union);
    let wb = WbSide::over_union(b, union);
    let (mut kl_pq, mut kl_qp) = (0.0f64, 0.0f64);
    let (mut h_pq, mut h_qp) = (0.0f64, 0.0f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut step = |ca: u64, cb: u64| {
        let pi = wa.prob(ca);
        let qi = wb.prob(cb);
        kl_pq += pi * (pi / qi).ln();
        kl_qp += qi * (qi / pi).ln();
        h_pq -= pi * qi.log2();
        h_qp -= qi * pi.log2();
    };
    while i < a.ids.len() && j < b.ids.len() {
        match a.ids[i].cmp(&b.ids[j]) {
            std::cmp::Ordering::Less => {
                step(a.counts[i], 0);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                step(0, b.counts[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                step(a.counts[i], b.counts[j]);
                i += 1;
                j += 1;
            }
        }
    }
    while i < a.ids.len() {
        step(a.counts[i], 0);
        i += 1;
    }
    while j < b.ids.len() {
        step(0, b.counts[j]);
        j += 1;
    }
    (kl_pq + kl_qp, h_pq.exp2() + h_qp.exp2())
}

struct ScoringAccount {
    platform: Platform,
    counts: SparseCounts,
}

/// A prepared (measure, mode) scoring function over an account collection.
pub struct Scorer {
    measure: Measure,
    mode: Mode,
    params: ScoreParams,
    accounts: HashMap<String, ScoringAccount>,
    tfidf: Option<TfidfCollection>,
    confusion: Option<ConfusionEstimates>,
}

impl Scorer {
    /// Prepares scoring over `accounts`.
    ///
    /// Account ids must be unique across both platforms. The corpus-wide
    /// measures fit their models here, so a zero-token account fails fast;
    /// the pairwise measures only reject empty accounts when asked to score
    /// them.
    pub fn new(
        accounts: &[AccountCorpus],
        measure: Measure,
        mode: Mode,
        params: ScoreParams,
    ) -> Result<Self, SimilarityError> {
        let mut seen = HashSet::new();
        for account in accounts {
            if !seen.insert(account.account_id.as_str()) {
                return Err(SimilarityError::DuplicateAccountId(
                    account.account_id.clone(),
                ));
            }
        }
        let streams: Vec<(String, Platform, TokenStream)> = accounts
            .iter()
            .map(|a| (a.account_id.clone(), a.platform, mode.stream_for(a)))
            .collect();

        let vocabulary = Arc::new(Vocabulary::union(streams.iter().map(|(_, _, s)| s)));
        let account_map = streams
            .iter()
            .map(|(id, platform, stream)| {
                (
                    id.clone(),
                    ScoringAccount {
                        platform: *platform,
                        counts: SparseCounts::build(stream, &vocabulary),
                    },
                )
            })
            .collect();

        let mut tfidf = None;
        let mut confusion = None;
        match measure {
            Measure::Kl2 | Measure::Pp2 => {}
            Measure::Tfidf => {
                let documents = streams
                    .iter()
                    .map(|(id, _, s)| (id.clone(), s.clone()))
                    .collect();
                tfidf = Some(tfidf_from_documents(documents)?);
            }
            Measure::Confusion => {
                let documents = streams
                    .into_iter()
                    .map(|(id, _, s)| (id, s))
                    .collect();
                confusion = Some(fit_confusion_documents(documents, params.alpha, params.beta)?);
            }
        }
        Ok(Self {
            measure,
            mode,
            params,
            accounts: account_map,
            tfidf,
            confusion,
        })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Fitted confusion tables, when the measure is `confusion`.
    pub fn confusion_estimates(&self) -> Option<&ConfusionEstimates> {
        self.confusion.as_ref()
    }

    /// Fitted TF-IDF collection, when the measure is `tfidf`.
    pub fn tfidf_collection(&self) -> Option<&TfidfCollection> {
        self.tfidf.as_ref()
    }

    fn account(&self, id: &str) -> Result<&ScoringAccount, SimilarityError> {
        self.accounts
            .get(id)
            .ok_or_else(|| SimilarityError::UnknownAccount(id.to_owned()))
    }

    fn pair_score(&self, query_id: &str, candidate_id: &str) -> Result<f64, SimilarityError> {
        match self.measure {
            Measure::Kl2 | Measure::Pp2 => {
                let query = self.account(query_id)?;
                let candidate = self.account(candidate_id)?;
                for (id, side) in [(query_id, query), (candidate_id, candidate)] {
                    if side.counts.total == 0 {
                        return Err(SimilarityError::EmptyTokenStream(id.to_owned()));
                    }
                }
                let (kl, pp) = kl2_pp2_streamed(&query.counts, &candidate.counts);
                Ok(match self.measure {
                    Measure::Kl2 => kl,
                    _ => pp,
                })
            }
            Measure::Tfidf => {
                let collection = self.tfidf.as_ref().expect("fitted at construction");
                let d1 = collection
                    .vector(query_id)
                    .ok_or_else(|| SimilarityError::UnknownAccount(query_id.to_owned()))?;
                let d2 = collection
                    .vector(candidate_id)
                    .ok_or_else(|| SimilarityError::UnknownAccount(candidate_id.to_owned()))?;
                cosine(d1, d2)
            }
            Measure::Confusion => {
                let estimates = self.confusion.as_ref().expect("fitted at construction");
                let (s, s_log_s) = estimates.similarity_by_ids(query_id, candidate_id)?;
                Ok(match self.params.confusion_ranking {
                    ConfusionRanking::SelectionProbability => s,
                    ConfusionRanking::SLogS => s_log_s,
                })
            }
        }
    }
}

impl CandidateScorer for Scorer {
    fn score_candidates(
        &self,
        query_id: &str,
        candidate_ids: &[String],
    ) -> Result<Vec<ScoredPair>, SimilarityError> {
        let query = self.account(query_id)?;
        let polarity = self.measure.polarity();
        let mut pairs = Vec::with_capacity(candidate_ids.len());
        for candidate_id in candidate_ids {
            let candidate = self.account(candidate_id)?;
            if candidate.platform == query.platform {
                return Err(SimilarityError::PlatformMismatch(candidate_id.clone()));
            }
            pairs.push(ScoredPair {
                query_account_id: query_id.to_owned(),
                candidate_account_id: candidate_id.clone(),
                score: self.pair_score(query_id, candidate_id)?,
                polarity,
            });
        }
        Ok(pairs)
    }
}

/// One-shot dispatch: prepare a [`Scorer`] and score a single query.
///
/// For repeated queries over the same collection, build the `Scorer` once and
/// reuse it; the corpus-wide measures refit on every call here.
pub fn score_measure(
    measure: Measure,
    mode: Mode,
    accounts: &[AccountCorpus],
    query_id: &str,
    candidate_ids: &[String],
    params: ScoreParams,
) -> Result<Vec<ScoredPair>, SimilarityError> {
    Scorer::new(accounts, measure, mode, params)?.score_candidates(query_id, candidate_ids)
}
