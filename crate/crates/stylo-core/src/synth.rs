//! Seeded synthetic paired-account corpora.
//!
//! Each user draws a word signature from a symmetric Dirichlet over the
//! vocabulary; the user's two accounts emit tokens from that signature mixed
//! with a platform-specific topic distribution at the configured shift
//! strength, so the two sides of a pair are related but thematically shifted
//! and no measure is handed the generator verbatim. Temporal habits
//! (preferred hours and weekdays, also Dirichlet-drawn) are shared across a
//! user's two accounts.
//!
//! Generation is single-threaded and consumes one seeded stream in a fixed
//! order: identical specs produce byte-identical output files.

use std::collections::HashSet;

use chrono::{DateTime, Datelike, NaiveDate, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{GroundTruthPair, Platform, Post};

/// Concentration of the per-platform topic distributions.
const TOPIC_CONCENTRATION: f64 = 1.0;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("vocabulary_size must be at least 10, got {0}")]
    VocabularyTooSmall(usize),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Everything that defines one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Number of users; each gets one account per platform.
    pub user_count: usize,
    pub vocabulary_size: usize,
    /// Symmetric Dirichlet concentration of per-user word signatures.
    /// Smaller means more idiosyncratic users; very large means everyone
    /// shares one near-uniform distribution.
    pub signature_concentration: f64,
    /// Mixing weight of the platform topic distribution in `[0, 1]`:
    /// emission = (1 - shift) * signature + shift * platform_topic.
    pub platform_shift: f64,
    /// Inclusive `[min, max]` posts per account.
    pub posts_per_account: (usize, usize),
    /// Inclusive `[min, max]` linguistic tokens per post.
    #[serde(default = "default_tokens_per_post")]
    pub tokens_per_post: (usize, usize),
    /// Sharpness of per-user hour/weekday habits; larger is spikier.
    pub temporal_sharpness: f64,
    pub window_start: DateTime<Utc>,
    pub window_end: DateTime<Utc>,
    pub seed: u64,
}

fn default_tokens_per_post() -> (usize, usize) {
    (4, 14)
}

impl GeneratorSpec {
    /// A mid-sized corpus with moderate platform shift, useful as a starting
    /// point; override what you need.
    pub fn example(seed: u64) -> Self {
        Self {
            user_count: 50,
            vocabulary_size: 500,
            signature_concentration: 0.05,
            platform_shift: 0.3,
            posts_per_account: (20, 60),
            tokens_per_post: default_tokens_per_post(),
            temporal_sharpness: 6.0,
            window_start: "2014-02-01T00:00:00Z".parse().unwrap(),
            window_end: "2015-02-01T00:00:00Z".parse().unwrap(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.vocabulary_size < 10 {
            return Err(SynthError::VocabularyTooSmall(self.vocabulary_size));
        }
        let check = |ok: bool, message: &str| -> Result<(), SynthError> {
            if ok {
                Ok(())
            } else {
                Err(SynthError::InvalidSpec(message.to_owned()))
            }
        };
        check(self.user_count >= 1, "user_count must be at least 1")?;
        check(
            self.signature_concentration.is_finite() && self.signature_concentration > 0.0,
            "signature_concentration must be positive",
        )?;
        check(
            (0.0..=1.0).contains(&self.platform_shift),
            "platform_shift must be in [0, 1]",
        )?;
        check(
            self.posts_per_account.0 >= 1 && self.posts_per_account.0 <= self.posts_per_account.1,
            "posts_per_account must be a nonempty range with min >= 1",
        )?;
        check(
            self.tokens_per_post.0 >= 1 && self.tokens_per_post.0 <= self.tokens_per_post.1,
            "tokens_per_post must be a nonempty range with min >= 1",
        )?;
        check(
            self.temporal_sharpness.is_finite() && self.temporal_sharpness > 0.0,
            "temporal_sharpness must be positive",
        )?;
        check(
            self.window_start < self.window_end,
            "window_start must precede window_end",
        )?;
        check(
            usable_dates(self.window_start, self.window_end).len() >= 7,
            "window must span at least seven full days",
        )?;
        Ok(())
    }
}

/// A generated corpus, already in ingestion order.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub posts: Vec<Post>,
    pub pairs: Vec<GroundTruthPair>,
}

/// Per-user generative state; exposed within the crate for tests.
pub(crate) struct UserModel {
    pub(crate) emission_a: Vec<f64>,
    pub(crate) emission_b: Vec<f64>,
    pub(crate) hour_weights: Vec<f64>,
    pub(crate) weekday_weights: Vec<f64>,
}

/// Symmetric Dirichlet sample via normalized Gamma draws.
fn sample_dirichlet(rng: &mut ChaCha8Rng, concentration: f64, dim: usize) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut draws: Vec<f64> = (0..dim).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        for d in &mut draws {
            *d /= total;
        }
    } else {
        // All mass underflowed (tiny concentration): fall back to uniform.
        draws.fill(1.0 / dim as f64);
    }
    draws
}

fn mix(signature: &[f64], topic: &[f64], shift: f64) -> Vec<f64> {
    signature
        .iter()
        .zip(topic)
        .map(|(s, t)| (1.0 - shift) * s + shift * t)
        .collect()
}

pub(crate) fn sample_user_models(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<UserModel> {
    let dim = spec.vocabulary_size;
    let topic_a = sample_dirichlet(rng, TOPIC_CONCENTRATION, dim);
    let topic_b = sample_dirichlet(rng, TOPIC_CONCENTRATION, dim);
    let habit_concentration = 1.0 / spec.temporal_sharpness;
    (0..spec.user_count)
        .map(|_| {
            let signature = sample_dirichlet(rng, spec.signature_concentration, dim);
            UserModel {
                emission_a: mix(&signature, &topic_a, spec.platform_shift),
                emission_b: mix(&signature, &topic_b, spec.platform_shift),
                hour_weights: sample_dirichlet(rng, habit_concentration, 24),
                weekday_weights: sample_dirichlet(rng, habit_concentration, 7),
            }
        })
        .collect()
}

/// Dates whose full day fits inside `[start, end)`, grouped by weekday
/// (Monday first).
fn usable_dates(start: DateTime<Utc>, end: DateTime<Utc>) -> Vec<NaiveDate> {
    let mut date = start.date_naive();
    if start.time() != chrono::NaiveTime::MIN {
        date = date.succ_opt().expect("date in range");
    }
    let mut out = Vec::new();
    loop {
        let day_end = date
            .succ_opt()
            .expect("date in range")
            .and_time(chrono::NaiveTime::MIN)
            .and_utc();
        if day_end > end {
            break;
        }
        out.push(date);
        date = date.succ_opt().expect("date in range");
    }
    out
}

fn fresh_account_id(rng: &mut ChaCha8Rng, platform: Platform, taken: &mut HashSet<String>) -> String {
    loop {
        let id = format!("{}_{:08x}", platform.as_str().to_lowercase(), rng.random::<u32>());
        if taken.insert(id.clone()) {
            return id;
        }
    }
}

/// Generates a corpus for `spec`. Identical specs (including seed) produce
/// identical output.
pub fn generate(spec: &GeneratorSpec) -> Result<SynthCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocabulary: Vec<String> = (0..spec.vocabulary_size)
        .map(|i| format!("t{i:05}"))
        .collect();
    let models = sample_user_models(spec, &mut rng);

    let dates = usable_dates(spec.window_start, spec.window_end);
    let mut dates_by_weekday: Vec<Vec<NaiveDate>> = vec![Vec::new(); 7];
    for &date in &dates {
        dates_by_weekday[date.weekday().num_days_from_monday() as usize].push(date);
    }

    let mut taken_ids = HashSet::new();
    let mut posts = Vec::new();
    let mut pairs = Vec::new();
    for (u, model) in models.iter().enumerate() {
        let account_a = fresh_account_id(&mut rng, Platform::A, &mut taken_ids);
        let account_b = fresh_account_id(&mut rng, Platform::B, &mut taken_ids);
        pairs.push(GroundTruthPair {
            user_id: format!("u{u:05}"),
            account_id_a: account_a.clone(),
            account_id_b: account_b.clone(),
        });
        let hour_picker = WeightedIndex::new(&model.hour_weights).expect("positive weights");
        let weekday_picker = WeightedIndex::new(&model.weekday_weights).expect("positive weights");
        for (platform, account_id, emission) in [
            (Platform::A, &account_a, &model.emission_a),
            (Platform::B, &account_b, &model.emission_b),
        ] {
            let word_picker = WeightedIndex::new(emission).expect("positive weights");
            let post_count =
                rng.random_range(spec.posts_per_account.0..=spec.posts_per_account.1);
            for _ in 0..post_count {
                let token_count =
                    rng.random_range(spec.tokens_per_post.0..=spec.tokens_per_post.1);
                let text = (0..token_count)
                    .map(|_| vocabulary[word_picker.sample(&mut rng)].as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                let weekday = weekday_picker.sample(&mut rng);
                let candidates = &dates_by_weekday[weekday];
                let date = candidates[rng.random_range(0..candidates.len())];
                let hour = hour_picker.sample(&mut rng) as u32;
                let minute = rng.random_range(0..60u32);
                let second = rng.random_range(0..60u32);
                let timestamp = date
                    .and_hms_opt(hour, minute, second)
                    .expect("valid time")
                    .and_utc()
                    .fixed_offset();
                posts.push(Post {
                    account_id: account_id.clone(),
                    platform,
                    timestamp,
                    text,
                });
            }
        }
    }
    Ok(SynthCorpus { posts, pairs })
}
