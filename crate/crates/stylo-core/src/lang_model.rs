//! Tokenization and Witten-Bell-smoothed unigram models.
//!
//! A [`UnigramModel`] is built from a [`TokenStream`] over a declared
//! [`Vocabulary`] that must cover every observed token. Witten-Bell smoothing
//! discounts observed words to `c / (N + T)` and spreads the reserved mass
//! `T / (N + T)` uniformly over the `Z` vocabulary words that were never
//! observed. When `Z = 0` there is nothing to reserve mass for and the model
//! falls back to maximum likelihood `c / N`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Token emitted for anything that looks like a URL.
pub const URL_TOKEN: &str = "<url>";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token {0:?} is not in the declared vocabulary")]
    TokenOutsideVocabulary(String),
    #[error("word {0:?} is not in the vocabulary")]
    WordNotInVocabulary(String),
    #[error("model has no observed tokens")]
    EmptyModel,
    #[error("models were built over different vocabularies")]
    VocabularyMismatch,
}

/// An ordered sequence of normalized tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn push(&mut self, token: String) {
        debug_assert!(!token.is_empty());
        self.tokens.push(token);
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Appends all tokens of `other`, preserving order.
    pub fn extend_from(&mut self, other: &TokenStream) {
        self.tokens.extend_from_slice(&other.tokens);
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }
}

impl From<Vec<String>> for TokenStream {
    fn from(tokens: Vec<String>) -> Self {
        Self::new(tokens)
    }
}

impl FromIterator<String> for TokenStream {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for TokenStream {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(str::to_owned).collect())
    }
}

/// Normalizes text into tokens.
///
/// The policy, applied in order: case-fold, split on Unicode whitespace,
/// collapse anything starting with a URL scheme (or `www.`) to [`URL_TOKEN`],
/// strip leading and trailing punctuation while keeping `#` and `@` prefixes,
/// and drop anything left empty. The output is stable under re-tokenization
/// of itself joined by spaces.
pub fn tokenize(text: &str) -> TokenStream {
    let folded = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in folded.split_whitespace() {
        if chunk == URL_TOKEN {
            tokens.push(URL_TOKEN.to_owned());
            continue;
        }
        let lead_trimmed =
            chunk.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@');
        if is_url(lead_trimmed) {
            tokens.push(URL_TOKEN.to_owned());
            continue;
        }
        let token = lead_trimmed.trim_end_matches(|c: char| !c.is_alphanumeric());
        if !token.is_empty() {
            tokens.push(token.to_owned());
        }
    }
    TokenStream::new(tokens)
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.")
}

/// A declared word set with a canonical (lexicographic) order.
///
/// All iteration-order-sensitive sums over a vocabulary run in this canonical
/// order, which is what makes the symmetrized measures exactly symmetric.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from arbitrary words; duplicates collapse.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = words.into_iter().map(Into::into).collect();
        words.sort_unstable();
        words.dedup();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Self { words, index }
    }

    /// The union of all distinct tokens in the given streams.
    pub fn union<'a, I>(streams: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenStream>,
    {
        Self::from_words(streams.into_iter().flat_map(|s| s.iter().map(str::to_owned)))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).map(|&i| i as usize)
    }

    /// The word at canonical position `idx`.
    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.words == other.words
    }
}

impl Eq for Vocabulary {}

/// Word counts plus the Witten-Bell quantities over a declared vocabulary.
#[derive(Debug, Clone)]
pub struct UnigramModel {
    vocabulary: Arc<Vocabulary>,
    counts: Vec<u64>,
    total_tokens: u64,
    observed_types: u32,
    unseen_types: u32,
}

impl UnigramModel {
    /// Counts the stream against `vocabulary`.
    ///
    /// Every token must be in the vocabulary; an uncovered token is a hard
    /// error because the caller controls vocabulary construction. An empty
    /// stream is a valid (but unusable for probabilities) model with `N = 0`.
    pub fn build(tokens: &TokenStream, vocabulary: Arc<Vocabulary>) -> Result<Self, ModelError> {
        let mut counts = vec![0u64; vocabulary.len()];
        for token in tokens.iter() {
            match vocabulary.index_of(token) {
                Some(i) => counts[i] += 1,
                None => return Err(ModelError::TokenOutsideVocabulary(token.to_owned())),
            }
        }
        Ok(Self::from_counts(vocabulary, counts))
    }

    /// Builds directly from vocabulary-aligned counts.
    pub fn from_counts(vocabulary: Arc<Vocabulary>, counts: Vec<u64>) -> Self {
        assert_eq!(counts.len(), vocabulary.len());
        let total_tokens = counts.iter().sum();
        let observed_types = counts.iter().filter(|&&c| c > 0).count() as u32;
        let unseen_types = vocabulary.len() as u32 - observed_types;
        Self {
            vocabulary,
            counts,
            total_tokens,
            observed_types,
            unseen_types,
        }
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    /// `N`: total observed tokens.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// `T`: number of distinct observed word types.
    pub fn observed_types(&self) -> u32 {
        self.observed_types
    }

    /// `Z`: number of vocabulary words never observed.
    pub fn unseen_types(&self) -> u32 {
        self.unseen_types
    }

    pub fn count(&self, word: &str) -> Option<u64> {
        self.vocabulary.index_of(word).map(|i| self.counts[i])
    }

    /// Witten-Bell-smoothed probability of `word`.
    ///
    /// Observed words get `c / (N + T)`; unobserved words share the reserved
    /// mass as `T / (Z (N + T))`. With `Z = 0` every vocabulary word was
    /// observed, there is nothing to reserve mass for, and the estimate
    /// reverts to maximum likelihood `c / N` so the distribution still sums
    /// to one.
    pub fn wb_prob(&self, word: &str) -> Result<f64, ModelError> {
        let idx = self
            .vocabulary
            .index_of(word)
            .ok_or_else(|| ModelError::WordNotInVocabulary(word.to_owned()))?;
        if self.total_tokens == 0 {
            return Err(ModelError::EmptyModel);
        }
        Ok(self.wb_prob_at(idx))
    }

    /// `wb_prob` by canonical vocabulary index, for full-vocabulary sweeps.
    pub fn wb_prob_at(&self, idx: usize) -> f64 {
        debug_assert!(self.total_tokens > 0);
        let n = self.total_tokens as f64;
        let c = self.counts[idx] as f64;
        if self.unseen_types == 0 {
            return c / n;
        }
        let t = f64::from(self.observed_types);
        if self.counts[idx] > 0 {
            c / (n + t)
        } else {
            t / (f64::from(self.unseen_types) * (n + t))
        }
    }
}

impl fmt::Display for UnigramModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UnigramModel(N={}, T={}, Z={}, |V|={})",
            self.total_tokens,
            self.observed_types,
            self.unseen_types,
            self.vocabulary.len()
        )
    }
}

pub(crate) fn ensure_shared_vocabulary(p: &UnigramModel, q: &UnigramModel) -> Result<(), ModelError> {
    if Arc::ptr_eq(&p.vocabulary, &q.vocabulary) || p.vocabulary == q.vocabulary {
        Ok(())
    } else {
        Err(ModelError::VocabularyMismatch)
    }
}

/// Cross-entropy `H(p, q) = -sum_w p*(w) log2 q*(w)` in bits, over the shared
/// vocabulary in canonical order.
///
/// Finite for any two non-empty models: Witten-Bell assigns positive mass to
/// every vocabulary word.
pub fn cross_entropy(p: &UnigramModel, q: &UnigramModel) -> Result<f64, ModelError> {
    ensure_shared_vocabulary(p, q)?;
    if p.total_tokens == 0 || q.total_tokens == 0 {
        return Err(ModelError::EmptyModel);
    }
    let mut h = 0.0;
    for idx in 0..p.vocabulary.len() {
        h -= p.wb_prob_at(idx) * q.wb_prob_at(idx).log2();
    }
    Ok(h)
}
