//! The four account-similarity measures over unigram models.
//!
//! Two measures compare smoothed distributions directly (symmetrized KL
//! divergence and symmetrized perplexity, both lower-is-similar) and two
//! compare accounts against the backdrop of the whole corpus (TF-IDF cosine
//! and the confusion model, both higher-is-similar).
//!
//! Every measure runs in one of three modes: `linguistic` (post text only),
//! `temporal` (the 74-word timing vocabulary only), or `combined` (both
//! corpora and vocabularies merged).
//!
//! Vocabulary scoping: the pairwise measures (KL, perplexity) rebuild both
//! models over the union of the two accounts' observed types, which keeps the
//! unseen-type count meaningful and every smoothed probability positive. The
//! corpus-wide measures (TF-IDF, confusion) use the union over all accounts.

mod confusion;
mod divergence;
mod scorer;
mod tfidf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::AccountCorpus;
use crate::lang_model::{ModelError, TokenStream};
use crate::temporal::TemporalWord;

pub use confusion::{
    confusion_similarity, fit_confusion, fit_confusion_documents, ConfusionEstimates,
};
pub use divergence::{kl2, pp2};
pub use scorer::{score_measure, CandidateScorer, Scorer};
pub use tfidf::{cosine, tfidf_from_documents, tfidf_vectors, TfidfCollection, TfidfVector};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("account {0:?} has no tokens in this mode")]
    EmptyTokenStream(String),
    #[error("need at least two accounts, got {0}")]
    TooFewAccounts(usize),
    #[error("TF-IDF vector has zero magnitude")]
    ZeroMagnitudeVector,
    #[error("unknown account {0:?}")]
    UnknownAccount(String),
    #[error("word {0:?} was never observed in the fitted corpus")]
    UnknownWord(String),
    #[error("account id {0:?} appears on both platforms; scoring needs globally unique ids")]
    DuplicateAccountId(String),
    #[error("query and candidates must be on opposite platforms (account {0:?})")]
    PlatformMismatch(String),
    #[error("Dirichlet priors must be positive and finite (alpha={alpha}, beta={beta})")]
    NonPositivePrior { alpha: f64, beta: f64 },
}

/// The four similarity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Kl2,
    Pp2,
    Tfidf,
    Confusion,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Kl2, Measure::Pp2, Measure::Tfidf, Measure::Confusion];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Kl2 => "kl2",
            Measure::Pp2 => "pp2",
            Measure::Tfidf => "tfidf",
            Measure::Confusion => "confusion",
        }
    }

    /// Whether larger or smaller scores mean "more similar" for this measure.
    pub fn polarity(self) -> Polarity {
        match self {
            Measure::Kl2 | Measure::Pp2 => Polarity::LowerIsSimilar,
            Measure::Tfidf | Measure::Confusion => Polarity::HigherIsSimilar,
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kl2" => Ok(Measure::Kl2),
            "pp2" => Ok(Measure::Pp2),
            "tfidf" => Ok(Measure::Tfidf),
            "confusion" => Ok(Measure::Confusion),
            other => Err(format!(
                "unknown measure {other:?} (expected kl2, pp2, tfidf, or confusion)"
            )),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which token stream a measure runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Linguistic,
    Temporal,
    Combined,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Linguistic, Mode::Temporal, Mode::Combined];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Linguistic => "linguistic",
            Mode::Temporal => "temporal",
            Mode::Combined => "combined",
        }
    }

    /// The stream this mode scores, derived from an assembled account.
    pub fn stream_for(self, account: &AccountCorpus) -> TokenStream {
        match self {
            Mode::Linguistic => account.token_stream.clone(),
            Mode::Temporal => account.temporal_stream.clone(),
            Mode::Combined => merge_combined(account),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linguistic" => Ok(Mode::Linguistic),
            "temporal" => Ok(Mode::Temporal),
            "combined" => Ok(Mode::Combined),
            other => Err(format!(
                "unknown mode {other:?} (expected linguistic, temporal, or combined)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Score direction of a measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    HigherIsSimilar,
    LowerIsSimilar,
}

/// One scored (query, candidate) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub query_account_id: String,
    pub candidate_account_id: String,
    pub score: f64,
    pub polarity: Polarity,
}

/// Which confusion-model quantity drives the ranking.
///
/// `S` is the probability that a single sampled word attributes to both
/// accounts, and is what the model construction motivates; `S ln S` is the
/// reported similarity value, but it is non-monotone in `S` (minimized at
/// `S = 1/e`), so ranking by it is offered only as a switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfusionRanking {
    SelectionProbability,
    SLogS,
}

/// Knobs for the corpus-wide measures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    /// Dirichlet prior over users in the confusion model.
    pub alpha: f64,
    /// Dirichlet prior over words in the confusion model.
    pub beta: f64,
    pub confusion_ranking: ConfusionRanking,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            confusion_ranking: ConfusionRanking::SelectionProbability,
        }
    }
}

/// Merges an account's linguistic and temporal streams into one.
///
/// Linguistic tokens that collide with the literal temporal words `w1`..`w74`
/// are escaped with a leading backslash before merging, so a post that
/// literally says "w8" stays distinct from the August bin.
pub fn merge_combined(account: &AccountCorpus) -> TokenStream {
    let mut tokens =
        Vec::with_capacity(account.token_stream.len() + account.temporal_stream.len());
    for token in account.token_stream.iter() {
        if TemporalWord::parse(token).is_some() {
            tokens.push(format!("\\{token}"));
        } else {
            tokens.push(token.to_owned());
        }
    }
    tokens.extend(account.temporal_stream.iter().map(str::to_owned));
    TokenStream::new(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Platform, Post};
    use chrono::DateTime;

    fn account_with(texts: &[&str], ts: &str) -> AccountCorpus {
        let posts: Vec<Post> = texts
            .iter()
            .map(|text| Post {
                account_id: "a1".into(),
                platform: Platform::A,
                timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
                text: (*text).to_owned(),
            })
            .collect();
        AccountCorpus::from_posts("a1".into(), Platform::A, posts)
    }

    #[test]
    fn merge_appends_temporal_words() {
        // 2016-08-05 02:00 is a Friday: w8 w17 w48 w53.
        let account = account_with(&["hi"], "2016-08-05T02:00:00Z");
        let merged = merge_combined(&account);
        assert_eq!(merged.tokens(), ["hi", "w8", "w17", "w48", "w53"]);
    }

    #[test]
    fn merge_of_empty_text_is_temporal_only() {
        let account = account_with(&[""], "2016-08-05T02:00:00Z");
        let merged = merge_combined(&account);
        assert_eq!(merged.tokens(), ["w8", "w17", "w48", "w53"]);
    }

    #[test]
    fn merge_escapes_literal_temporal_lookalikes() {
        let account = account_with(&["w8 w75 w08"], "2016-08-05T02:00:00Z");
        let merged = merge_combined(&account);
        assert_eq!(
            merged.tokens(),
            ["\\w8", "w75", "w08", "w8", "w17", "w48", "w53"]
        );
    }

    #[test]
    fn measure_and_mode_parse_their_names() {
        for m in Measure::ALL {
            assert_eq!(m.as_str().parse::<Measure>().unwrap(), m);
        }
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("cosine".parse::<Measure>().is_err());
        assert!("both".parse::<Mode>().is_err());
    }

    #[test]
    fn measure_polarities_are_fixed() {
        assert_eq!(Measure::Kl2.polarity(), Polarity::LowerIsSimilar);
        assert_eq!(Measure::Pp2.polarity(), Polarity::LowerIsSimilar);
        assert_eq!(Measure::Tfidf.polarity(), Polarity::HigherIsSimilar);
        assert_eq!(Measure::Confusion.polarity(), Polarity::HigherIsSimilar);
    }
}
