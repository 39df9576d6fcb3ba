//! Explicit first-order representations: PPMI and initGloVe straight from
//! counts, eSG and eGloVe reconstructed from trained models. Rows are
//! vocabulary-dimensional and always computed on demand; no full
//! |W| x |W| matrix is ever materialized.

use crate::cooccur::{smoothed_context_dist, CoocMatrix};
use crate::corpus::Vocabulary;
use crate::model::{EmbeddingModel, ModelKind, WordVectors};
use crate::sgns::{sigmoid, NoiseDistribution};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewKind {
    Ppmi,
    InitGlove,
    Esg,
    Eglove,
}

impl ViewKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViewKind::Ppmi => "ppmi",
            ViewKind::InitGlove => "init_glove",
            ViewKind::Esg => "esg",
            ViewKind::Eglove => "eglove",
        }
    }
}

/// Which side of the model a normalization term is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSide {
    Word,
    Context,
}

/// Exact eSG normalizers: `eta_w = E_{c'~N} sigma(v_w . u_c')` for every word
/// (or the context-side analogue). The expectation is the noise-weighted sum
/// over the whole vocabulary, not a Monte Carlo estimate.
pub fn esg_norm_terms(
    model: &EmbeddingModel,
    noise: &NoiseDistribution,
    side: NormSide,
) -> Vec<f64> {
    assert_eq!(
        noise.len(),
        model.vocab_len(),
        "noise support must be the model vocabulary"
    );
    let n = model.vocab_len();
    (0..n)
        .map(|i| {
            let mut expectation = 0.0;
            for j in 0..n {
                let score = match side {
                    NormSide::Word => model.score(i, j),
                    NormSide::Context => model.score(j, i),
                };
                expectation += noise.probability(j) * sigmoid(score);
            }
            expectation
        })
        .collect()
}

/// `e_{w:c} = sigma(v_w . u_c) / sqrt(eta_w * eta~_c)` with precomputed norms.
pub fn esg_value(
    model: &EmbeddingModel,
    eta_word: &[f64],
    eta_context: &[f64],
    w: usize,
    c: usize,
) -> f64 {
    sigmoid(model.score(w, c)) / (eta_word[w] * eta_context[c]).sqrt()
}

/// `e_w = v_w . U^T`; the trained bias terms act as normalizers and are
/// deliberately left out of the values.
pub fn eglove_row(model: &EmbeddingModel, w: usize) -> Result<Vec<f64>> {
    if model.kind() != ModelKind::Glove {
        return Err(Error::WrongModelKind {
            expected: "glove".into(),
            actual: model.kind().as_str().into(),
        });
    }
    Ok((0..model.vocab_len()).map(|c| model.score(w, c)).collect())
}

/// A row-accessible first-order representation. PPMI and initGloVe read the
/// count matrix; eSG and eGloVe read a trained model.
pub enum ExplicitView<'a> {
    Ppmi(PpmiView<'a>),
    InitGlove(InitGloveView<'a>),
    Esg(EsgView<'a>),
    Eglove(EgloveView<'a>),
}

pub struct PpmiView<'a> {
    cooc: &'a CoocMatrix,
    vocab: &'a Vocabulary,
    log_context_dist: Vec<f64>,
    log_shift: f64,
}

pub struct InitGloveView<'a> {
    cooc: &'a CoocMatrix,
    vocab: &'a Vocabulary,
}

pub struct EsgView<'a> {
    model: &'a EmbeddingModel,
    eta_word: Vec<f64>,
    eta_context: Vec<f64>,
}

pub struct EgloveView<'a> {
    model: &'a EmbeddingModel,
}

/// PPMI with context-distribution smoothing and an optional shift:
/// `max(0, ln(#wc / (#w. * p_a(c))) - ln k)`. Unstored cells are zero.
pub fn ppmi_view<'a>(
    cooc: &'a CoocMatrix,
    vocab: &'a Vocabulary,
    alpha: f64,
    shift_k: u64,
) -> Result<ExplicitView<'a>> {
    assert!(shift_k >= 1, "shift must be at least 1");
    let dist = smoothed_context_dist(cooc, alpha)?;
    Ok(ExplicitView::Ppmi(PpmiView {
        cooc,
        vocab,
        log_context_dist: dist.into_iter().map(f64::ln).collect(),
        log_shift: (shift_k as f64).ln(),
    }))
}

/// The matrix GloVe factorizes: `ln p(w|c) = ln #wc - ln #.c`, defined only
/// on stored cells.
pub fn init_glove_view<'a>(
    cooc: &'a CoocMatrix,
    vocab: &'a Vocabulary,
) -> Result<ExplicitView<'a>> {
    if cooc.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(ExplicitView::InitGlove(InitGloveView { cooc, vocab }))
}

/// eSG view with the normalizers computed once, exactly.
pub fn esg_view<'a>(
    model: &'a EmbeddingModel,
    noise: &NoiseDistribution,
) -> Result<ExplicitView<'a>> {
    if noise.len() != model.vocab_len() {
        return Err(Error::InvalidArgument(
            "noise distribution does not cover the model vocabulary".into(),
        ));
    }
    esg_view_with_norms(
        model,
        esg_norm_terms(model, noise, NormSide::Word),
        esg_norm_terms(model, noise, NormSide::Context),
    )
}

/// eSG view over normalizers the caller already computed (they are the
/// expensive part and can be cached).
pub fn esg_view_with_norms(
    model: &EmbeddingModel,
    eta_word: Vec<f64>,
    eta_context: Vec<f64>,
) -> Result<ExplicitView<'_>> {
    if eta_word.len() != model.vocab_len() || eta_context.len() != model.vocab_len() {
        return Err(Error::InvalidArgument(
            "normalizer vectors do not cover the model vocabulary".into(),
        ));
    }
    if eta_word
        .iter()
        .chain(&eta_context)
        .any(|&e| !(e > 0.0 && e < 1.0))
    {
        return Err(Error::InvalidArgument(
            "eSG normalizers must lie strictly inside (0, 1)".into(),
        ));
    }
    Ok(ExplicitView::Esg(EsgView {
        model,
        eta_word,
        eta_context,
    }))
}

pub fn eglove_view(model: &EmbeddingModel) -> Result<ExplicitView<'_>> {
    if model.kind() != ModelKind::Glove {
        return Err(Error::WrongModelKind {
            expected: "glove".into(),
            actual: model.kind().as_str().into(),
        });
    }
    Ok(ExplicitView::Eglove(EgloveView { model }))
}

impl<'a> ExplicitView<'a> {
    pub fn kind(&self) -> ViewKind {
        match self {
            ExplicitView::Ppmi(_) => ViewKind::Ppmi,
            ExplicitView::InitGlove(_) => ViewKind::InitGlove,
            ExplicitView::Esg(_) => ViewKind::Esg,
            ExplicitView::Eglove(_) => ViewKind::Eglove,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ExplicitView::Ppmi(v) => v.vocab.len(),
            ExplicitView::InitGlove(v) => v.vocab.len(),
            ExplicitView::Esg(v) => v.model.vocab_len(),
            ExplicitView::Eglove(v) => v.model.vocab_len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lookup(&self, word: &str) -> Option<usize> {
        match self {
            ExplicitView::Ppmi(v) => v.vocab.index_of(word),
            ExplicitView::InitGlove(v) => v.vocab.index_of(word),
            ExplicitView::Esg(v) => v.model.index_of(word),
            ExplicitView::Eglove(v) => v.model.index_of(word),
        }
    }

    pub fn word_at(&self, idx: usize) -> &str {
        match self {
            ExplicitView::Ppmi(v) => v.vocab.word(idx),
            ExplicitView::InitGlove(v) => v.vocab.word(idx),
            ExplicitView::Esg(v) => v.model.word(idx),
            ExplicitView::Eglove(v) => v.model.word(idx),
        }
    }

    /// `e_{w:c}`. For the PPMI view an unstored cell is 0 by definition; for
    /// initGloVe it is undefined and reported as an error.
    pub fn try_value(&self, w: usize, c: usize) -> Result<f64> {
        match self {
            ExplicitView::Ppmi(v) => Ok(v.value(w, c)),
            ExplicitView::InitGlove(v) => {
                v.value(w, c).ok_or_else(|| Error::UnobservedCell {
                    word: v.vocab.word(w).to_string(),
                    context: v.vocab.word(c).to_string(),
                })
            }
            ExplicitView::Esg(v) => Ok(esg_value(v.model, &v.eta_word, &v.eta_context, w, c)),
            ExplicitView::Eglove(v) => Ok(v.model.score(w, c)),
        }
    }

    /// Dense row; initGloVe fills its undefined cells with 0 here, which is
    /// only meant for vector-space (second-order) use of the view.
    pub fn row(&self, w: usize) -> Vec<f64> {
        match self {
            ExplicitView::Ppmi(v) => (0..v.vocab.len()).map(|c| v.value(w, c)).collect(),
            ExplicitView::InitGlove(v) => (0..v.vocab.len())
                .map(|c| v.value(w, c).unwrap_or(0.0))
                .collect(),
            ExplicitView::Esg(v) => (0..v.model.vocab_len())
                .map(|c| esg_value(v.model, &v.eta_word, &v.eta_context, w, c))
                .collect(),
            ExplicitView::Eglove(v) => {
                (0..v.model.vocab_len()).map(|c| v.model.score(w, c)).collect()
            }
        }
    }

    /// The eSG normalizers, exposed for diagnostics and tests.
    pub fn esg_norms(&self) -> Option<(&[f64], &[f64])> {
        match self {
            ExplicitView::Esg(v) => Some((&v.eta_word, &v.eta_context)),
            _ => None,
        }
    }
}

impl<'a> PpmiView<'a> {
    fn value(&self, w: usize, c: usize) -> f64 {
        let count = self.cooc.count(w, c);
        if count == 0 {
            return 0.0;
        }
        let pmi = (count as f64).ln()
            - (self.cooc.word_marginal(w) as f64).ln()
            - self.log_context_dist[c];
        (pmi - self.log_shift).max(0.0)
    }
}

impl<'a> InitGloveView<'a> {
    fn value(&self, w: usize, c: usize) -> Option<f64> {
        let count = self.cooc.count(w, c);
        if count == 0 {
            return None;
        }
        Some((count as f64).ln() - (self.cooc.context_marginal(c) as f64).ln())
    }
}

impl<'a> WordVectors for ExplicitView<'a> {
    fn vocab_len(&self) -> usize {
        self.len()
    }

    fn vector_dim(&self) -> usize {
        self.len()
    }

    fn index_of(&self, word: &str) -> Option<usize> {
        self.lookup(word)
    }

    fn word(&self, idx: usize) -> &str {
        self.word_at(idx)
    }

    fn vector(&self, w: usize) -> Vec<f64> {
        self.row(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::count_cooc;
    use crate::corpus::{cda_augment, tokenize_normalize, AugmentMode};
    use crate::glove::{residual, train_glove, GloveConfig, GloveTrainer};
    use crate::lexicons;
    use crate::sgns::init_model;
    use crate::stats::pearson;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Cursor;

    fn counts(text: &str, window: usize) -> (CoocMatrix, Vocabulary) {
        let s = tokenize_normalize(Cursor::new(text)).unwrap();
        let v = Vocabulary::build(&s, 1).unwrap();
        let m = count_cooc(&s, &v, window);
        (m, v)
    }

    fn random_model(words: &[&str], dim: usize, seed: u64) -> EmbeddingModel {
        let sentences = vec![words.iter().map(|w| w.to_string()).collect()];
        let vocab = Vocabulary::build(&sentences, 1).unwrap();
        let mut model = init_model(&vocab, dim, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in 0..model.vocab_len() {
            for x in model.v_row_mut(w) {
                *x = rng.gen_range(-1.0..1.0);
            }
            for x in model.u_row_mut(w) {
                *x = rng.gen_range(-1.0..1.0);
            }
        }
        model
    }

    #[test]
    fn ppmi_two_token_corpus() {
        let (m, v) = counts("a b", 1);
        let view = ppmi_view(&m, &v, 1.0, 1).unwrap();
        let a = v.index_of("a").unwrap();
        let b = v.index_of("b").unwrap();
        assert!((view.try_value(a, b).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        // shift of 2 eats the whole ln 2
        let shifted = ppmi_view(&m, &v, 1.0, 2).unwrap();
        assert_eq!(shifted.try_value(a, b).unwrap(), 0.0);
        // unstored stays zero
        assert_eq!(view.try_value(a, a).unwrap(), 0.0);
    }

    #[test]
    fn ppmi_rows_are_nonnegative() {
        let (m, v) = counts("the cat sat on the mat\nthe dog and the cat", 2);
        let view = ppmi_view(&m, &v, 0.75, 1).unwrap();
        for w in 0..v.len() {
            assert!(view.row(w).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn ppmi_matches_direct_probability_form() {
        // same quantity computed through joint/marginal probabilities
        let (m, v) = counts("a b c a b\nc a b a\nb c", 2);
        let alpha = 0.75;
        let view = ppmi_view(&m, &v, alpha, 1).unwrap();
        let total = m.grand_total() as f64;
        let cds: f64 = (0..v.len())
            .map(|c| (m.context_marginal(c) as f64).powf(alpha))
            .sum();
        for w in 0..v.len() {
            for c in 0..v.len() {
                let expected = if m.count(w, c) == 0 {
                    0.0
                } else {
                    let p_wc = m.count(w, c) as f64 / total;
                    let p_w = m.word_marginal(w) as f64 / total;
                    let p_c = (m.context_marginal(c) as f64).powf(alpha) / cds;
                    (p_wc / (p_w * p_c)).ln().max(0.0)
                };
                assert!((view.try_value(w, c).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ppmi_exactly_symmetric_after_full_augmentation() {
        let text = "she is a nurse\nthe nurse helped him\nhis sister met a doctor\n\
                    the doctor said he was fine\nthe sky is blue";
        let sentences = tokenize_normalize(Cursor::new(text)).unwrap();
        let lexicon = lexicons::gender_lexicon_symmetric();
        let augmented = cda_augment(&sentences, &lexicon, AugmentMode::Full, 0);
        let vocab = Vocabulary::build(&augmented, 1).unwrap();
        let m = count_cooc(&augmented, &vocab, 5);
        let view = ppmi_view(&m, &vocab, 0.75, 1).unwrap();
        for (x, x_prime) in lexicon.pairs() {
            let (Some(ix), Some(ixp)) = (vocab.index_of(x), vocab.index_of(x_prime)) else {
                continue;
            };
            for w in 0..vocab.len() {
                if lexicon.contains(vocab.word(w)) {
                    continue;
                }
                assert_eq!(m.count(w, ix), m.count(w, ixp));
                let a = view.try_value(w, ix).unwrap();
                let b = view.try_value(w, ixp).unwrap();
                assert_eq!(a, b, "ppmi asymmetric for ({}, {x}/{x_prime})", vocab.word(w));
            }
        }
    }

    #[test]
    fn init_glove_examples() {
        // #<a,b> = 2 while b co-occurs 4 times in total
        let (m, v) = counts("a b\na b\nc b\nc b", 1);
        let view = init_glove_view(&m, &v).unwrap();
        let a = v.index_of("a").unwrap();
        let b = v.index_of("b").unwrap();
        assert_eq!(m.count(a, b), 2);
        assert_eq!(m.context_marginal(b), 4);
        assert!((view.try_value(a, b).unwrap() + 2.0f64.ln()).abs() < 1e-12);

        // #<w,c> equal to the full context marginal gives ln 1 = 0
        let (m2, v2) = counts("a b\na b", 1);
        let view2 = init_glove_view(&m2, &v2).unwrap();
        let a2 = v2.index_of("a").unwrap();
        let b2 = v2.index_of("b").unwrap();
        assert_eq!(view2.try_value(a2, b2).unwrap(), 0.0);

        // unobserved cell is absent, not zero
        let (m3, v3) = counts("a b\nc d", 1);
        let view3 = init_glove_view(&m3, &v3).unwrap();
        let a3 = v3.index_of("a").unwrap();
        let c3 = v3.index_of("c").unwrap();
        assert!(matches!(
            view3.try_value(a3, c3),
            Err(Error::UnobservedCell { .. })
        ));
        assert_eq!(view3.row(a3)[c3], 0.0);
    }

    #[test]
    fn norms_are_half_when_scores_vanish() {
        let words = ["a", "b", "c", "d"];
        let mut model = random_model(&words, 3, 5);
        for w in 0..4 {
            model.u_row_mut(w).fill(0.0);
        }
        let noise = NoiseDistribution::from_counts(&[4, 3, 2, 1], 0.75).unwrap();
        for side in [NormSide::Word, NormSide::Context] {
            let eta = esg_norm_terms(&model, &noise, side);
            for &e in &eta {
                assert!((e - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn norm_hand_example() {
        // two contexts with p = (1/2, 1/2) and scores (0, ln 3)
        let words = ["w", "c"];
        let mut model = random_model(&words, 1, 1);
        model.v_row_mut(0)[0] = 1.0;
        model.u_row_mut(0)[0] = 0.0;
        model.u_row_mut(1)[0] = 3.0f64.ln();
        let noise = NoiseDistribution::from_counts(&[1, 1], 1.0).unwrap();
        let eta = esg_norm_terms(&model, &noise, NormSide::Word);
        assert!((eta[0] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn esg_value_hand_example() {
        let words = ["w", "c"];
        let mut model = random_model(&words, 1, 2);
        model.v_row_mut(0)[0] = 1.0;
        model.u_row_mut(1)[0] = 3.0f64.ln(); // sigma = 0.75
        let eta_word = vec![0.625, 0.5];
        let eta_context = vec![0.4, 0.5];
        let e = esg_value(&model, &eta_word, &eta_context, 0, 1);
        assert!((e - 0.75 / 0.3125f64.sqrt()).abs() < 1e-12);
        assert!((e - 1.3416407864998738).abs() < 1e-10);
    }

    #[test]
    fn symmetric_model_gives_unit_esg() {
        let words = ["a", "b", "c"];
        let mut model = random_model(&words, 4, 3);
        for w in 0..3 {
            model.u_row_mut(w).fill(0.0);
        }
        let noise = NoiseDistribution::from_counts(&[5, 2, 1], 0.75).unwrap();
        let view = esg_view(&model, &noise).unwrap();
        for w in 0..3 {
            for c in 0..3 {
                assert!((view.try_value(w, c).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn esg_monotone_in_score() {
        let words = ["a", "b"];
        let mut model = random_model(&words, 1, 4);
        let eta_w = vec![0.3, 0.4];
        let eta_c = vec![0.6, 0.7];
        model.v_row_mut(0)[0] = 1.0;
        let mut last = f64::NEG_INFINITY;
        for score in [-2.0, -0.5, 0.0, 0.5, 2.0] {
            model.u_row_mut(1)[0] = score;
            let e = esg_value(&model, &eta_w, &eta_c, 0, 1);
            assert!(e > last);
            last = e;
        }
    }

    #[test]
    fn esg_norms_match_monte_carlo() {
        let words = ["a", "b", "c", "d", "e", "f"];
        let model = random_model(&words, 8, 11);
        let noise = NoiseDistribution::from_counts(&[30, 14, 9, 5, 2, 1], 0.75).unwrap();
        let eta = esg_norm_terms(&model, &noise, NormSide::Word);
        let draws = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for w in 0..words.len() {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..draws {
                let c = noise.sample(&mut rng);
                let s = sigmoid(model.score(w, c));
                sum += s;
                sum_sq += s * s;
            }
            let mean = sum / draws as f64;
            let var = (sum_sq / draws as f64 - mean * mean).max(0.0);
            let se = (var / draws as f64).sqrt();
            assert!(
                (eta[w] - mean).abs() <= 3.0 * se.max(1e-9),
                "word {w}: exact {} vs mc {mean} (3se {})",
                eta[w],
                3.0 * se
            );
        }
    }

    #[test]
    fn esg_values_positive_and_norms_in_unit_interval() {
        let words = ["a", "b", "c", "d", "e"];
        let model = random_model(&words, 6, 13);
        let noise = NoiseDistribution::from_counts(&[9, 7, 5, 3, 1], 0.75).unwrap();
        let view = esg_view(&model, &noise).unwrap();
        let (eta_w, eta_c) = view.esg_norms().unwrap();
        for &e in eta_w.iter().chain(eta_c) {
            assert!(e > 0.0 && e < 1.0);
        }
        for w in 0..words.len() {
            for value in view.row(w) {
                assert!(value.is_finite() && value > 0.0);
            }
        }
    }

    #[test]
    fn esg_invariant_under_relabeling() {
        let words = ["a", "b", "c", "d"];
        let model = random_model(&words, 5, 17);
        let counts = [8u64, 5, 3, 2];
        let noise = NoiseDistribution::from_counts(&counts, 0.75).unwrap();
        let view = esg_view(&model, &noise).unwrap();

        // permute the vocabulary: new index i holds old index perm[i]
        let perm = [2usize, 0, 3, 1];
        let permuted_words = ["c", "a", "d", "b"];
        let mut permuted = random_model(&permuted_words, 5, 0);
        for new in 0..4 {
            let old = perm[new];
            permuted
                .v_row_mut(new)
                .copy_from_slice(&model.v_row(old).to_vec());
            permuted
                .u_row_mut(new)
                .copy_from_slice(&model.u_row(old).to_vec());
        }
        let permuted_counts: Vec<u64> = perm.iter().map(|&o| counts[o]).collect();
        let permuted_noise = NoiseDistribution::from_counts(&permuted_counts, 0.75).unwrap();
        let permuted_view = esg_view(&permuted, &permuted_noise).unwrap();

        for new_w in 0..4 {
            for new_c in 0..4 {
                let a = permuted_view.try_value(new_w, new_c).unwrap();
                let b = view.try_value(perm[new_w], perm[new_c]).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eglove_row_examples() {
        let (_m, v) = counts("a b\na b", 1);
        let config = GloveConfig {
            dim: 1,
            epochs: 0,
            ..GloveConfig::default()
        };
        let mut model = GloveTrainer::new(&v, &config).into_model();
        model.v_row_mut(0)[0] = 2.0;
        model.u_row_mut(0)[0] = 1.0;
        model.u_row_mut(1)[0] = -3.0;
        assert_eq!(eglove_row(&model, 0).unwrap(), vec![2.0, -6.0]);

        model.v_row_mut(1)[0] = 0.0;
        assert_eq!(eglove_row(&model, 1).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn eglove_rejects_sgns_models() {
        let words = ["a", "b"];
        let model = random_model(&words, 2, 1);
        assert!(matches!(
            eglove_row(&model, 0),
            Err(Error::WrongModelKind { .. })
        ));
        assert!(eglove_view(&model).is_err());
    }

    #[test]
    fn eglove_reconstruction_improves_with_training() {
        let text = "the cat sat on the mat\nthe dog sat by the door\ncat dog mat door";
        let corpus = std::iter::repeat(text).take(8).collect::<Vec<_>>().join("\n");
        let (m, v) = counts(&corpus, 2);
        let config = GloveConfig {
            dim: 8,
            epochs: 40,
            seed: 6,
            ..GloveConfig::default()
        };
        let initial = GloveTrainer::new(&v, &config).into_model();
        let trained = train_glove(&m, &v, &config).unwrap();

        let corr = |model: &EmbeddingModel| {
            let mut predicted = Vec::new();
            let mut target = Vec::new();
            for (w, c, n) in m.sorted_cells() {
                // e_{w:c} + b_w + b~_c should track ln #<w,c>
                predicted.push(residual(model, w, c, 1.0));
                target.push((n as f64).ln());
            }
            pearson(&predicted, &target).unwrap()
        };
        assert!(corr(&trained) > corr(&initial));
    }
}
