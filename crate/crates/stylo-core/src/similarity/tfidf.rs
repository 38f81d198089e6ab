//! TF-IDF vectors over accounts and cosine similarity between them.
//!
//! One document per account. Term frequency is normalized by document length
//! (`c_w / N_doc`) and the IDF factor is `ln(D / df_w)` with no smoothing:
//! words enter the document-frequency table only when observed, so `df >= 1`
//! by construction. A word present in every document weighs zero everywhere.

use std::collections::BTreeMap;

use crate::corpus::AccountCorpus;
use crate::lang_model::TokenStream;

use super::{Mode, SimilarityError};

/// A sparse nonnegative TF-IDF vector for one account.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVector {
    weights: BTreeMap<String, f64>,
}

impl TfidfVector {
    /// Builds a vector directly from weights; weights must be nonnegative.
    pub fn from_weights(weights: BTreeMap<String, f64>) -> Self {
        debug_assert!(weights.values().all(|w| *w >= 0.0));
        Self { weights }
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn weight(&self, word: &str) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }

    /// Euclidean norm, summed in key order.
    pub fn magnitude(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }
}

/// TF-IDF vectors for a whole account collection, plus the document count and
/// document frequencies they were built from.
#[derive(Debug, Clone)]
pub struct TfidfCollection {
    vectors: BTreeMap<String, TfidfVector>,
    document_count: usize,
    document_frequency: BTreeMap<String, usize>,
}

impl TfidfCollection {
    pub fn vector(&self, account_id: &str) -> Option<&TfidfVector> {
        self.vectors.get(account_id)
    }

    pub fn vectors(&self) -> &BTreeMap<String, TfidfVector> {
        &self.vectors
    }

    pub fn document_count(&self) -> usize {
        self.document_count
    }

    /// Number of documents containing `word` (0 if never observed).
    pub fn document_frequency(&self, word: &str) -> usize {
        self.document_frequency.get(word).copied().unwrap_or(0)
    }
}

/// Builds one TF-IDF vector per account over the given mode's streams.
///
/// Requires at least two accounts (IDF is undefined for one document) and at
/// least one token per account; an empty account is an error naming it.
pub fn tfidf_vectors(
    accounts: &[AccountCorpus],
    mode: Mode,
) -> Result<TfidfCollection, SimilarityError> {
    let documents: Vec<(String, TokenStream)> = accounts
        .iter()
        .map(|a| (a.account_id.clone(), mode.stream_for(a)))
        .collect();
    tfidf_from_documents(documents)
}

/// The same construction over arbitrary `(id, tokens)` documents.
pub fn tfidf_from_documents(
    documents: Vec<(String, TokenStream)>,
) -> Result<TfidfCollection, SimilarityError> {
    if documents.len() < 2 {
        return Err(SimilarityError::TooFewAccounts(documents.len()));
    }
    let mut term_counts: Vec<(String, BTreeMap<String, u64>, u64)> = Vec::new();
    let mut document_frequency: BTreeMap<String, usize> = BTreeMap::new();
    for (id, tokens) in documents {
        if tokens.is_empty() {
            return Err(SimilarityError::EmptyTokenStream(id));
        }
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for token in tokens.iter() {
            *counts.entry(token.to_owned()).or_insert(0) += 1;
        }
        for word in counts.keys() {
            *document_frequency.entry(word.clone()).or_insert(0) += 1;
        }
        let total = tokens.len() as u64;
        term_counts.push((id, counts, total));
    }
    let document_count = term_counts.len();
    let mut vectors = BTreeMap::new();
    for (id, counts, total) in term_counts {
        let weights: BTreeMap<String, f64> = counts
            .into_iter()
            .map(|(word, count)| {
                let tf = count as f64 / total as f64;
                let idf = (document_count as f64 / document_frequency[&word] as f64).ln();
                (word, tf * idf)
            })
            .collect();
        vectors.insert(id, TfidfVector::from_weights(weights));
    }
    Ok(TfidfCollection {
        vectors,
        document_count,
        document_frequency,
    })
}

/// Cosine similarity over the sparse intersection, clamped to `[0, 1]`.
/// Higher is similar. A zero-magnitude vector is an error.
pub fn cosine(d1: &TfidfVector, d2: &TfidfVector) -> Result<f64, SimilarityError> {
    let n1 = d1.magnitude();
    let n2 = d2.magnitude();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(SimilarityError::ZeroMagnitudeVector);
    }
    let mut dot = 0.0;
    for (word, w1) in &d1.weights {
        if let Some(w2) = d2.weights.get(word) {
            dot += w1 * w2;
        }
    }
    Ok((dot / (n1 * n2)).clamp(0.0, 1.0))
}
