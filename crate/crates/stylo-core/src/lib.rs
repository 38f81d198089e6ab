#![forbid(unsafe_code)]

//! Account matching across two platforms from nothing but post text and
//! post timestamps.
//!
//! The pipeline:
//!
//! 1. [`corpus`] parses line-delimited post records and ground-truth pairs,
//!    applies the analysis window and minimum-post filter, and assembles one
//!    [`AccountCorpus`] per account.
//! 2. [`lang_model`] tokenizes text and builds Witten-Bell-smoothed unigram
//!    models over a declared vocabulary.
//! 3. [`temporal`] maps each timestamp to four words of a 74-word temporal
//!    vocabulary (month, day of month, day of week, hour) so timing can be
//!    modeled with the same unigram machinery.
//! 4. [`similarity`] scores account pairs with four measures — symmetrized
//!    KL divergence, symmetrized perplexity, TF-IDF cosine, and a confusion
//!    model — over linguistic, temporal, or combined token streams.
//! 5. [`evaluator`] ranks every query against the candidate pool and reports
//!    accuracy, average rank, and a 20-bin rank-percentile histogram, plus a
//!    1-of-k matching task.
//! 6. [`synth`] generates seeded synthetic paired-account corpora so the
//!    whole pipeline can be exercised without real data.

pub mod corpus;
pub mod evaluator;
pub mod lang_model;
pub mod similarity;
pub mod synth;
pub mod temporal;

pub use corpus::{
    build_accounts, corpus_stats, load_ground_truth, parse_posts, AccountCorpus, CorpusError,
    CorpusStats, GroundTruthPair, ParsedPosts, Platform, Post, Window,
};
pub use evaluator::{
    evaluate, evaluate_with, one_of_k_task, percentile_histogram, rank_candidates, Direction,
    EvalError, MatchReport, RankingResult,
};
pub use lang_model::{cross_entropy, tokenize, ModelError, TokenStream, UnigramModel, Vocabulary};
pub use similarity::{
    confusion_similarity, cosine, fit_confusion, kl2, merge_combined, pp2, score_measure,
    tfidf_vectors, CandidateScorer, ConfusionEstimates, ConfusionRanking, Measure, Mode, Polarity,
    ScoreParams, ScoredPair, Scorer, SimilarityError, TfidfCollection, TfidfVector,
};
pub use synth::{generate, GeneratorSpec, SynthCorpus, SynthError};
pub use temporal::{featurize_timestamp, featurize_timestamps, TemporalWord};
