//! Benchmarks for the hot paths: per-query scoring against a full candidate
//! pool, and the one-time corpus-wide fits.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use stylo_bench::bench_corpus;
use stylo_core::similarity::{CandidateScorer, Measure, Mode, ScoreParams, Scorer};

fn score_one_query(c: &mut Criterion) {
    let corpus = bench_corpus(100, 1000);
    let query = corpus.pairs[0].account_id_a.clone();
    let candidates: Vec<String> = corpus
        .pairs
        .iter()
        .map(|p| p.account_id_b.clone())
        .collect();

    let mut group = c.benchmark_group("score_query_vs_100");
    for measure in Measure::ALL {
        let scorer = Scorer::new(
            &corpus.accounts,
            measure,
            Mode::Combined,
            ScoreParams::default(),
        )
        .unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(measure.as_str()),
            &scorer,
            |b, scorer| {
                b.iter(|| {
                    black_box(
                        scorer
                            .score_candidates(black_box(&query), black_box(&candidates))
                            .unwrap(),
                    )
                })
            },
        );
    }
    group.finish();
}

fn prepare_scorer(c: &mut Criterion) {
    let corpus = bench_corpus(100, 1000);
    let mut group = c.benchmark_group("prepare_scorer_100_accounts");
    group.sample_size(20);
    for measure in Measure::ALL {
        group.bench_with_input(
            BenchmarkId::from_parameter(measure.as_str()),
            &corpus.accounts,
            |b, accounts| {
                b.iter(|| {
                    black_box(
                        Scorer::new(
                            black_box(accounts),
                            measure,
                            Mode::Combined,
                            ScoreParams::default(),
                        )
                        .unwrap(),
                    )
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, score_one_query, prepare_scorer);
criterion_main!(benches);
