//! Shared fixtures for the scoring benchmarks.

use stylo_core::corpus::{build_accounts, AccountCorpus, GroundTruthPair, Window};
use stylo_core::synth::{generate, GeneratorSpec};

/// A filtered synthetic corpus sized for benchmarking the N x N scoring
/// stage.
pub struct BenchCorpus {
    pub accounts: Vec<AccountCorpus>,
    pub pairs: Vec<GroundTruthPair>,
}

pub fn bench_corpus(user_count: usize, vocabulary_size: usize) -> BenchCorpus {
    let spec = GeneratorSpec {
        user_count,
        vocabulary_size,
        ..GeneratorSpec::example(99)
    };
    let corpus = generate(&spec).expect("valid spec");
    let window = Window::new(spec.window_start, spec.window_end).unwrap();
    let accounts = build_accounts(corpus.posts, window, 20).unwrap();
    BenchCorpus {
        accounts,
        pairs: corpus.pairs,
    }
}
