//! Symmetrized KL divergence and symmetrized perplexity.
//!
//! Both walk the shared vocabulary in canonical order and accumulate each
//! direction separately; summing two independently accumulated directions is
//! what makes the symmetrized values exactly invariant under argument swap.

use crate::lang_model::{cross_entropy, ensure_shared_vocabulary, ModelError, UnigramModel};

use super::SimilarityError;

/// Symmetrized KL divergence `KL(p||q) + KL(q||p)` in nats. Lower is similar.
///
/// Each direction is `sum_w p*(w) ln(p*(w) / q*(w))`; Witten-Bell smoothing
/// keeps every denominator positive.
pub fn kl2(p: &UnigramModel, q: &UnigramModel) -> Result<f64, SimilarityError> {
    ensure_shared_vocabulary(p, q)?;
    if p.total_tokens() == 0 || q.total_tokens() == 0 {
        return Err(ModelError::EmptyModel.into());
    }
    let mut kl_pq = 0.0;
    let mut kl_qp = 0.0;
    for idx in 0..p.vocabulary().len() {
        let pi = p.wb_prob_at(idx);
        let qi = q.wb_prob_at(idx);
        kl_pq += pi * (pi / qi).ln();
        kl_qp += qi * (qi / pi).ln();
    }
    Ok(kl_pq + kl_qp)
}

/// Symmetrized perplexity `2^H(p,q) + 2^H(q,p)`. Lower is similar.
pub fn pp2(p: &UnigramModel, q: &UnigramModel) -> Result<f64, SimilarityError> {
    let h_pq = cross_entropy(p, q)?;
    let h_qp = cross_entropy(q, p)?;
    Ok(h_pq.exp2() + h_qp.exp2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang_model::{TokenStream, Vocabulary};
    use std::sync::Arc;

    fn pair(p_tokens: &[&str], q_tokens: &[&str]) -> (UnigramModel, UnigramModel) {
        let p_stream: TokenStream = p_tokens.iter().copied().collect();
        let q_stream: TokenStream = q_tokens.iter().copied().collect();
        let vocab = Arc::new(Vocabulary::union([&p_stream, &q_stream]));
        (
            UnigramModel::build(&p_stream, Arc::clone(&vocab)).unwrap(),
            UnigramModel::build(&q_stream, vocab).unwrap(),
        )
    }

    #[test]
    fn kl2_of_identical_models_is_exactly_zero() {
        let (p, q) = pair(&["a", "a", "b"], &["a", "a", "b"]);
        assert_eq!(kl2(&p, &q).unwrap(), 0.0);
        assert_eq!(kl2(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl2_against_direct_formula_three_quarters() {
        // p* = (0.75, 0.25), q* = (0.25, 0.75): each direction is 0.5 ln 3.
        let (p, q) = pair(&["a", "a", "a", "b"], &["a", "b", "b", "b"]);
        let expected = 3f64.ln();
        assert!((kl2(&p, &q).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn kl2_against_direct_formula_nine_tenths() {
        // p* = (0.9, 0.1), q* = (0.5, 0.5).
        let p_tokens: Vec<&str> = std::iter::repeat_n("a", 9).chain(["b"]).collect();
        let (p, q) = pair(&p_tokens, &["a", "b"]);
        let kl_pq = 0.9 * (0.9f64 / 0.5).ln() + 0.1 * (0.1f64 / 0.5).ln();
        let kl_qp = 0.5 * (0.5f64 / 0.9).ln() + 0.5 * (0.5f64 / 0.1).ln();
        assert!((kl_pq - 0.3681).abs() < 1e-4);
        assert!((kl_qp - 0.5108).abs() < 1e-4);
        assert!((kl2(&p, &q).unwrap() - (kl_pq + kl_qp)).abs() < 1e-12);
    }

    #[test]
    fn kl2_is_exactly_symmetric() {
        let (p, q) = pair(&["a", "a", "b", "c"], &["b", "c", "c", "d", "d"]);
        assert_eq!(kl2(&p, &q).unwrap(), kl2(&q, &p).unwrap());
    }

    #[test]
    fn kl2_rejects_vocabulary_mismatch() {
        let (p, _) = pair(&["a"], &["a"]);
        let (_, q) = pair(&["b"], &["b"]);
        assert!(matches!(
            kl2(&p, &q),
            Err(SimilarityError::Model(ModelError::VocabularyMismatch))
        ));
    }

    #[test]
    fn pp2_uniform_over_four_words() {
        let (p, q) = pair(&["a", "b", "c", "d"], &["a", "b", "c", "d"]);
        assert!((pp2(&p, &q).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pp2_self_is_twice_exponentiated_entropy() {
        let (p, _) = pair(&["a", "a", "a", "b"], &["a"]);
        let h = cross_entropy(&p, &p).unwrap();
        assert!((pp2(&p, &p).unwrap() - 2.0 * h.exp2()).abs() < 1e-12);
    }

    #[test]
    fn pp2_against_direct_formula() {
        // p* = (0.5, 0.5), q* = (0.25, 0.75): H(p,q) ~ 1.2075, H(q,p) = 1,
        // so pp2 = 2^1.2075 + 2 ~ 4.3094.
        let (p, q) = pair(&["a", "b"], &["a", "b", "b", "b"]);
        let h_pq = -(0.5 * 0.25f64.log2() + 0.5 * 0.75f64.log2());
        let expected = h_pq.exp2() + 2.0;
        assert!((pp2(&p, &q).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 4.3094).abs() < 1e-4);
    }

    #[test]
    fn pp2_is_exactly_symmetric() {
        let (p, q) = pair(&["a", "a", "b", "c"], &["b", "c", "c", "d", "d"]);
        assert_eq!(pp2(&p, &q).unwrap(), pp2(&q, &p).unwrap());
    }
}
