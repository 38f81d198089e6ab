//! The confusion model: how likely two accounts are to be mistaken for each
//! other on the evidence of a single sampled word.
//!
//! The corpus is treated as one long token string generated by an auxiliary
//! model: each token first selects a user from a multinomial, then a word
//! from that user's word multinomial. Both multinomials get Dirichlet priors
//! (symmetric, strengths `alpha` over users and `beta` over words), so the
//! fitted tables are posterior means:
//!
//! ```text
//! p(u)   = (n_u + alpha) / (N + alpha * U)
//! p(w|u) = (c_{u,w} + beta) / (n_u + beta * V)
//! p(w)   = sum_u p(u) p(w|u)
//! p(u|w) = p(u) p(w|u) / p(w)
//! ```
//!
//! The pairwise similarity is `S = sum_w p(w) p(u1|w) p(u2|w)`, the
//! probability that one sampled word is attributed to `u1` and `u2` at once.
//! `S * ln(S)` is reported alongside.

use std::collections::HashMap;
use std::sync::Arc;

use crate::corpus::AccountCorpus;
use crate::lang_model::{TokenStream, Vocabulary};

use super::{Mode, SimilarityError};

/// Fitted confusion-model tables over a fixed set of users (accounts).
#[derive(Debug, Clone)]
pub struct ConfusionEstimates {
    users: Vec<String>,
    user_index: HashMap<String, u32>,
    vocabulary: Arc<Vocabulary>,
    p_user: Vec<f64>,
    p_word: Vec<f64>,
    /// Row-major `[word][user]` posterior table `p(u|w)`.
    p_user_given_word: Vec<f64>,
    alpha: f64,
    beta: f64,
}

impl ConfusionEstimates {
    /// User ids in canonical (sorted) order.
    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p_user(&self, user: &str) -> Result<f64, SimilarityError> {
        Ok(self.p_user[self.user_idx(user)?])
    }

    pub fn p_word(&self, word: &str) -> Result<f64, SimilarityError> {
        let idx = self
            .vocabulary
            .index_of(word)
            .ok_or_else(|| SimilarityError::UnknownWord(word.to_owned()))?;
        Ok(self.p_word[idx])
    }

    pub fn p_user_given_word(&self, word: &str, user: &str) -> Result<f64, SimilarityError> {
        let w = self
            .vocabulary
            .index_of(word)
            .ok_or_else(|| SimilarityError::UnknownWord(word.to_owned()))?;
        let u = self.user_idx(user)?;
        Ok(self.p_user_given_word[w * self.users.len() + u])
    }

    fn user_idx(&self, user: &str) -> Result<usize, SimilarityError> {
        self.user_index
            .get(user)
            .map(|&i| i as usize)
            .ok_or_else(|| SimilarityError::UnknownAccount(user.to_owned()))
    }

    /// `S` for a pair of user indices, summed over words in canonical order.
    ///
    /// The two posteriors are multiplied together first, so the value is
    /// bit-identical under argument swap.
    fn pair_similarity(&self, u1: usize, u2: usize) -> f64 {
        let user_count = self.users.len();
        let mut s = 0.0;
        for w in 0..self.p_word.len() {
            let row = w * user_count;
            s += self.p_word[w] * (self.p_user_given_word[row + u1] * self.p_user_given_word[row + u2]);
        }
        s
    }

    pub(crate) fn similarity_by_ids(
        &self,
        u1: &str,
        u2: &str,
    ) -> Result<(f64, f64), SimilarityError> {
        let i = self.user_idx(u1)?;
        let j = self.user_idx(u2)?;
        let s = self.pair_similarity(i, j);
        let s_log_s = if s > 0.0 { s * s.ln() } else { 0.0 };
        Ok((s, s_log_s))
    }
}

/// Fits the confusion model over all accounts in the given mode.
pub fn fit_confusion(
    accounts: &[AccountCorpus],
    mode: Mode,
    alpha: f64,
    beta: f64,
) -> Result<ConfusionEstimates, SimilarityError> {
    let documents: Vec<(String, TokenStream)> = accounts
        .iter()
        .map(|a| (a.account_id.clone(), mode.stream_for(a)))
        .collect();
    fit_confusion_documents(documents, alpha, beta)
}

/// The same fit over arbitrary `(user, tokens)` documents.
pub fn fit_confusion_documents(
    documents: Vec<(String, TokenStream)>,
    alpha: f64,
    beta: f64,
) -> Result<ConfusionEstimates, SimilarityError> {
    if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(SimilarityError::NonPositivePrior { alpha, beta });
    }
    if documents.len() < 2 {
        return Err(SimilarityError::TooFewAccounts(documents.len()));
    }
    let mut ordered: Vec<(String, TokenStream)> = documents;
    ordered.sort_by(|a, b| a.0.cmp(&b.0));

    let vocabulary = Arc::new(Vocabulary::union(ordered.iter().map(|(_, t)| t)));
    let user_count = ordered.len();
    let vocab_size = vocabulary.len();

    // Per-user token totals and sparse per-word counts.
    let mut token_totals = vec![0u64; user_count];
    let mut word_counts: Vec<HashMap<u32, u64>> = vec![HashMap::new(); user_count];
    for (u, (id, tokens)) in ordered.iter().enumerate() {
        if tokens.is_empty() {
            return Err(SimilarityError::EmptyTokenStream(id.clone()));
        }
        token_totals[u] = tokens.len() as u64;
        for token in tokens.iter() {
            let w = vocabulary.index_of(token).expect("union vocabulary covers stream") as u32;
            *word_counts[u].entry(w).or_insert(0) += 1;
        }
    }
    let corpus_total: u64 = token_totals.iter().sum();

    let p_user: Vec<f64> = token_totals
        .iter()
        .map(|&n_u| (n_u as f64 + alpha) / (corpus_total as f64 + alpha * user_count as f64))
        .collect();

    // Fill the [word][user] table with p(w|u) first, fold out p(w), then
    // convert each cell to the posterior p(u|w).
    let mut table = vec![0.0f64; vocab_size * user_count];
    for u in 0..user_count {
        let denom = token_totals[u] as f64 + beta * vocab_size as f64;
        let background = beta / denom;
        for w in 0..vocab_size {
            table[w * user_count + u] = background;
        }
        for (&w, &c) in &word_counts[u] {
            table[w as usize * user_count + u] = (c as f64 + beta) / denom;
        }
    }
    let mut p_word = vec![0.0f64; vocab_size];
    for (w, marginal) in p_word.iter_mut().enumerate() {
        let row = &mut table[w * user_count..(w + 1) * user_count];
        let mut total = 0.0;
        for (u, cell) in row.iter().enumerate() {
            total += p_user[u] * cell;
        }
        *marginal = total;
        for (u, cell) in row.iter_mut().enumerate() {
            *cell = p_user[u] * *cell / total;
        }
    }

    let users: Vec<String> = ordered.into_iter().map(|(id, _)| id).collect();
    let user_index = users
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i as u32))
        .collect();
    Ok(ConfusionEstimates {
        users,
        user_index,
        vocabulary,
        p_user,
        p_word,
        p_user_given_word: table,
        alpha,
        beta,
    })
}

/// `(S, S ln S)` for two users. `S` is higher-is-similar; the ranking
/// direction between the two values is chosen by
/// [`ConfusionRanking`](super::ConfusionRanking).
pub fn confusion_similarity(
    estimates: &ConfusionEstimates,
    u1: &str,
    u2: &str,
) -> Result<(f64, f64), SimilarityError> {
    estimates.similarity_by_ids(u1, u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(items: &[(&str, &[&str])], alpha: f64, beta: f64) -> ConfusionEstimates {
        let documents = items
            .iter()
            .map(|(id, tokens)| ((*id).to_owned(), tokens.iter().copied().collect()))
            .collect();
        fit_confusion_documents(documents, alpha, beta).unwrap()
    }

    #[test]
    fn flat_priors_on_balanced_corpus() {
        // U = 2, two tokens each, V = 2, alpha = beta = 1: p(u) = 3/6 = 0.5.
        let est = fit(&[("u1", &["a", "a"]), ("u2", &["b", "b"])], 1.0, 1.0);
        assert!((est.p_user("u1").unwrap() - 0.5).abs() < 1e-15);
        assert!((est.p_user("u2").unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_corpora_confuse_equally_in_the_small_prior_limit() {
        let est = fit(&[("u1", &["a", "b"]), ("u2", &["a", "b"])], 1e-9, 1e-9);
        for word in ["a", "b"] {
            assert!((est.p_user_given_word(word, "u1").unwrap() - 0.5).abs() < 1e-6);
            assert!((est.p_user_given_word(word, "u2").unwrap() - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn disjoint_vocabularies_attribute_to_the_owner_in_the_small_prior_limit() {
        let est = fit(&[("u1", &["a", "b"]), ("u2", &["c", "d"])], 1e-9, 1e-9);
        assert!((est.p_user_given_word("a", "u1").unwrap() - 1.0).abs() < 1e-6);
        assert!(est.p_user_given_word("a", "u2").unwrap() < 1e-6);
        let (s, _) = confusion_similarity(&est, "u1", "u2").unwrap();
        assert!(s < 1e-6);
    }

    #[test]
    fn self_similarity_of_half_owner_is_one_half_in_the_small_prior_limit() {
        // u1 owns half of the 4-token corpus with a vocabulary disjoint from
        // u2's: S(u1, u1) = sum over u1's words of p(w) = 0.5.
        let est = fit(&[("u1", &["a", "b"]), ("u2", &["c", "d"])], 1e-9, 1e-9);
        let (s, _) = confusion_similarity(&est, "u1", "u1").unwrap();
        assert!((s - 0.5).abs() < 1e-6);
    }

    #[test]
    fn distributions_normalize() {
        let est = fit(
            &[("u1", &["a", "a", "b"]), ("u2", &["b", "c"]), ("u3", &["a", "c", "c", "d"])],
            0.7,
            0.3,
        );
        let sum_users: f64 = est.p_user.iter().sum();
        assert!((sum_users - 1.0).abs() < 1e-9);
        let sum_words: f64 = est.p_word.iter().sum();
        assert!((sum_words - 1.0).abs() < 1e-9);
        for w in 0..est.p_word.len() {
            let row = w * est.users.len();
            let sum: f64 = (0..est.users.len())
                .map(|u| est.p_user_given_word[row + u])
                .sum();
            assert!((sum - 1.0).abs() < 1e-9, "word row {w} sums to {sum}");
        }
    }

    #[test]
    fn marginal_identity_holds() {
        // sum over u2 of S(u1, u2) telescopes to p(u1).
        let est = fit(
            &[("u1", &["a", "a", "b"]), ("u2", &["b", "c"]), ("u3", &["a", "d"])],
            1.0,
            0.5,
        );
        for u1 in ["u1", "u2", "u3"] {
            let total: f64 = ["u1", "u2", "u3"]
                .iter()
                .map(|u2| confusion_similarity(&est, u1, u2).unwrap().0)
                .sum();
            assert!((total - est.p_user(u1).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn similarity_is_bit_symmetric() {
        let est = fit(
            &[("u1", &["a", "a", "b"]), ("u2", &["b", "c"]), ("u3", &["a", "d"])],
            1.0,
            0.5,
        );
        let (s12, l12) = confusion_similarity(&est, "u1", "u2").unwrap();
        let (s21, l21) = confusion_similarity(&est, "u2", "u1").unwrap();
        assert_eq!(s12, s21);
        assert_eq!(l12, l21);
    }

    #[test]
    fn s_log_s_is_reported() {
        let est = fit(&[("u1", &["a", "b"]), ("u2", &["a", "c"])], 1.0, 1.0);
        let (s, s_log_s) = confusion_similarity(&est, "u1", "u2").unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!((s_log_s - s * s.ln()).abs() < 1e-15);
        assert!(s_log_s < 0.0);
    }

    #[test]
    fn rejects_bad_priors_and_unknown_users() {
        let documents = vec![
            ("u1".to_owned(), ["a"].iter().copied().collect()),
            ("u2".to_owned(), ["b"].iter().copied().collect()),
        ];
        assert!(matches!(
            fit_confusion_documents(documents.clone(), 0.0, 1.0),
            Err(SimilarityError::NonPositivePrior { .. })
        ));
        assert!(matches!(
            fit_confusion_documents(documents.clone(), 1.0, -2.0),
            Err(SimilarityError::NonPositivePrior { .. })
        ));
        let est = fit_confusion_documents(documents, 1.0, 1.0).unwrap();
        assert!(matches!(
            confusion_similarity(&est, "u1", "nope"),
            Err(SimilarityError::UnknownAccount(id)) if id == "nope"
        ));
    }

    #[test]
    fn rejects_empty_documents() {
        let documents = vec![
            ("u1".to_owned(), ["a"].iter().copied().collect()),
            ("u2".to_owned(), TokenStream::default()),
        ];
        assert!(matches!(
            fit_confusion_documents(documents, 1.0, 1.0),
            Err(SimilarityError::EmptyTokenStream(id)) if id == "u2"
        ));
    }
}
