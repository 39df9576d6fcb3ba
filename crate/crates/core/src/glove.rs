//! GloVe: AdaGrad factorization of log co-occurrence counts into word and
//! context vectors plus per-word and per-context biases.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cooccur::CoocMatrix;
use crate::corpus::Vocabulary;
use crate::model::{EmbeddingModel, ModelKind};
use crate::{Error, Result};

/// Weighting `f(x) = min(1, (x / x_max)^weight_exp)`.
pub fn glove_weight(count: f64, x_max: f64, weight_exp: f64) -> f64 {
    debug_assert!(count > 0.0);
    (count / x_max).powf(weight_exp).min(1.0)
}

/// Weighted squared residual for one stored cell:
/// `f(x) * (v_w . u_c + b_w + b~_c - ln x)^2`.
pub fn cell_loss(
    model: &EmbeddingModel,
    w: usize,
    c: usize,
    count: f64,
    x_max: f64,
    weight_exp: f64,
) -> f64 {
    let r = residual(model, w, c, count);
    glove_weight(count, x_max, weight_exp) * r * r
}

/// `v_w . u_c + b_w + b~_c - ln x`
pub fn residual(model: &EmbeddingModel, w: usize, c: usize, count: f64) -> f64 {
    model.score(w, c) + model.bias(w) + model.context_bias(c) - count.ln()
}

/// Exact gradients of [`cell_loss`] at the current point.
pub struct CellGradients {
    pub v_w: Vec<f64>,
    pub u_c: Vec<f64>,
    pub b_w: f64,
    pub b_tilde_c: f64,
}

pub fn cell_gradients(
    model: &EmbeddingModel,
    w: usize,
    c: usize,
    count: f64,
    x_max: f64,
    weight_exp: f64,
) -> CellGradients {
    let common = 2.0 * glove_weight(count, x_max, weight_exp) * residual(model, w, c, count);
    CellGradients {
        v_w: model.u_row(c).iter().map(|&x| common * x).collect(),
        u_c: model.v_row(w).iter().map(|&x| common * x).collect(),
        b_w: common,
        b_tilde_c: common,
    }
}

#[derive(Debug, Clone)]
pub struct GloveConfig {
    pub dim: usize,
    pub x_max: f64,
    pub weight_exp: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for GloveConfig {
    fn default() -> GloveConfig {
        GloveConfig {
            dim: 300,
            x_max: 100.0,
            weight_exp: 0.75,
            epochs: 15,
            lr: 0.05,
            seed: 1,
            threads: 1,
        }
    }
}

/// Trainer state: the model plus AdaGrad accumulators (initialized to one,
/// following the reference tool).
pub struct GloveTrainer {
    model: EmbeddingModel,
    grad_sq_v: Vec<f64>,
    grad_sq_u: Vec<f64>,
    grad_sq_b: Vec<f64>,
    grad_sq_bt: Vec<f64>,
    x_max: f64,
    weight_exp: f64,
    lr: f64,
}

impl GloveTrainer {
    pub fn new(vocab: &Vocabulary, config: &GloveConfig) -> GloveTrainer {
        let words: Vec<String> = vocab.words().map(str::to_string).collect();
        let mut model = EmbeddingModel::zeros(ModelKind::Glove, words, config.dim);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let half = 0.5 / config.dim as f64;
        for w in 0..vocab.len() {
            for x in model.v_row_mut(w) {
                *x = rng.gen_range(-half..half);
            }
            for x in model.u_row_mut(w) {
                *x = rng.gen_range(-half..half);
            }
            *model.bias_mut(w) = rng.gen_range(-half..half);
            *model.context_bias_mut(w) = rng.gen_range(-half..half);
        }
        let n = vocab.len();
        GloveTrainer {
            model,
            grad_sq_v: vec![1.0; n * config.dim],
            grad_sq_u: vec![1.0; n * config.dim],
            grad_sq_b: vec![1.0; n],
            grad_sq_bt: vec![1.0; n],
            x_max: config.x_max,
            weight_exp: config.weight_exp,
            lr: config.lr,
        }
    }

    pub fn model(&self) -> &EmbeddingModel {
        &self.model
    }

    pub fn into_model(self) -> EmbeddingModel {
        self.model
    }

    /// One AdaGrad step on a stored cell. Returns the pre-update loss.
    pub fn step(&mut self, w: usize, c: usize, count: f64) -> Result<f64> {
        let dim = self.model.dim();
        let loss = cell_loss(&self.model, w, c, count, self.x_max, self.weight_exp);
        let common =
            2.0 * glove_weight(count, self.x_max, self.weight_exp)
                * residual(&self.model, w, c, count);

        let wo = w * dim;
        let co = c * dim;
        for d in 0..dim {
            let gv = common * self.model.u_row(c)[d];
            let gu = common * self.model.v_row(w)[d];
            let (v_buf, u_buf) = self.model.raw_buffers_mut();
            v_buf[wo + d] -= self.lr * gv / self.grad_sq_v[wo + d].sqrt();
            u_buf[co + d] -= self.lr * gu / self.grad_sq_u[co + d].sqrt();
            self.grad_sq_v[wo + d] += gv * gv;
            self.grad_sq_u[co + d] += gu * gu;
        }
        *self.model.bias_mut(w) -= self.lr * common / self.grad_sq_b[w].sqrt();
        *self.model.context_bias_mut(c) -= self.lr * common / self.grad_sq_bt[c].sqrt();
        self.grad_sq_b[w] += common * common;
        self.grad_sq_bt[c] += common * common;

        let finite = self.model.v_row(w).iter().all(|x| x.is_finite())
            && self.model.u_row(c).iter().all(|x| x.is_finite())
            && self.model.bias(w).is_finite()
            && self.model.context_bias(c).is_finite();
        if !finite {
            return Err(Error::Divergence {
                context: "glove_step".into(),
            });
        }
        Ok(loss)
    }
}

/// Trains over the stored cells, visiting them in a freshly seeded-shuffled
/// order every epoch. Single-worker mode is bitwise deterministic.
pub fn train_glove(
    cooc: &CoocMatrix,
    vocab: &Vocabulary,
    config: &GloveConfig,
) -> Result<EmbeddingModel> {
    train_glove_logged(cooc, vocab, config).map(|(model, _)| model)
}

/// [`train_glove`] that also reports total weighted loss per epoch (measured
/// on pre-update residuals as the epoch progresses).
pub fn train_glove_logged(
    cooc: &CoocMatrix,
    vocab: &Vocabulary,
    config: &GloveConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    if cooc.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut trainer = GloveTrainer::new(vocab, config);
    if config.epochs == 0 {
        return Ok((trainer.into_model(), Vec::new()));
    }

    let cells = cooc.sorted_cells();
    let mut order: Vec<usize> = (0..cells.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x91077));
    let mut log = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        shuffle(&mut order, &mut rng);
        let mut loss_sum = 0.0;
        for &k in &order {
            let (w, c, n) = cells[k];
            loss_sum += trainer.step(w, c, n as f64)?;
        }
        log.push(loss_sum);
    }
    Ok((trainer.into_model(), log))
}

fn shuffle<R: Rng>(order: &mut [usize], rng: &mut R) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::count_cooc;
    use crate::corpus::tokenize_normalize;
    use std::io::Cursor;

    fn fixture(text: &str) -> (CoocMatrix, Vocabulary) {
        let s = tokenize_normalize(Cursor::new(text)).unwrap();
        let v = Vocabulary::build(&s, 1).unwrap();
        let m = count_cooc(&s, &v, 2);
        (m, v)
    }

    #[test]
    fn weight_examples() {
        assert_eq!(glove_weight(100.0, 100.0, 0.75), 1.0);
        assert!((glove_weight(16.0, 256.0, 0.75) - 0.125).abs() < 1e-12);
        assert_eq!(glove_weight(500.0, 100.0, 0.75), 1.0);
    }

    #[test]
    fn zero_residual_means_zero_gradients() {
        let (_, vocab) = fixture("a b");
        let config = GloveConfig {
            dim: 3,
            ..GloveConfig::default()
        };
        let mut trainer = GloveTrainer::new(&vocab, &config);
        // force an exactly-zero residual: score 0, biases 0, ln(1) = 0
        trainer.model.v_row_mut(0).fill(0.0);
        *trainer.model.bias_mut(0) = 0.0;
        *trainer.model.context_bias_mut(1) = 0.0;
        let before = trainer.model.clone();
        trainer.step(0, 1, 1.0).unwrap();
        assert_eq!(trainer.model, before);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (_, vocab) = fixture("a b c d");
        let config = GloveConfig {
            dim: 4,
            seed: 9,
            ..GloveConfig::default()
        };
        let trainer = GloveTrainer::new(&vocab, &config);
        let mut model = trainer.model().clone();
        let (w, c, count, x_max, we) = (0usize, 1usize, 7.0, 100.0, 0.75);
        let grads = cell_gradients(&model, w, c, count, x_max, we);
        let h = 1e-5;
        let dim = model.dim();

        enum Slot {
            V(usize),
            U(usize),
            B,
            Bt,
        }
        let mut probe = |slot: Slot, analytic: f64| {
            let read_write = |m: &mut EmbeddingModel, delta: f64| match slot {
                Slot::V(d) => m.v_row_mut(w)[d] += delta,
                Slot::U(d) => m.u_row_mut(c)[d] += delta,
                Slot::B => *m.bias_mut(w) += delta,
                Slot::Bt => *m.context_bias_mut(c) += delta,
            };
            read_write(&mut model, h);
            let plus = cell_loss(&model, w, c, count, x_max, we);
            read_write(&mut model, -2.0 * h);
            let minus = cell_loss(&model, w, c, count, x_max, we);
            read_write(&mut model, h);
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (analytic - numeric).abs() / numeric.abs().max(1e-8);
            assert!(rel < 1e-6, "rel err {rel}");
        };

        for d in 0..dim {
            let g = grads.v_w[d];
            probe(Slot::V(d), g);
            let g = grads.u_c[d];
            probe(Slot::U(d), g);
        }
        probe(Slot::B, grads.b_w);
        probe(Slot::Bt, grads.b_tilde_c);
    }

    #[test]
    fn single_cell_problem_converges() {
        let (_, vocab) = fixture("a b");
        let config = GloveConfig {
            dim: 5,
            x_max: 1.0, // full weight on the single cell
            epochs: 0,
            seed: 3,
            ..GloveConfig::default()
        };
        let mut trainer = GloveTrainer::new(&vocab, &config);
        let mut last = f64::INFINITY;
        for _ in 0..500 {
            last = trainer.step(0, 1, 2.0).unwrap();
        }
        assert!(last < 1e-6, "residual^2 after 500 steps: {last}");
    }

    #[test]
    fn epochs_zero_returns_initialization() {
        let (m, vocab) = fixture("a b c a b");
        let config = GloveConfig {
            dim: 4,
            epochs: 0,
            seed: 21,
            ..GloveConfig::default()
        };
        let model = train_glove(&m, &vocab, &config).unwrap();
        assert_eq!(model, GloveTrainer::new(&vocab, &config).into_model());
    }

    #[test]
    fn training_is_deterministic_for_seed() {
        let (m, vocab) = fixture("the cat sat on the mat\nthe dog chased the cat");
        let config = GloveConfig {
            dim: 6,
            epochs: 4,
            seed: 77,
            ..GloveConfig::default()
        };
        let a = train_glove(&m, &vocab, &config).unwrap();
        let b = train_glove(&m, &vocab, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn loss_decreases_over_epochs() {
        let text = "the cat sat on the mat while the dog slept near the door\n\
                    a cat and a dog met near the mat\nthe door was open";
        let corpus = std::iter::repeat(text).take(6).collect::<Vec<_>>().join("\n");
        let (m, vocab) = fixture(&corpus);
        let config = GloveConfig {
            dim: 8,
            epochs: 5,
            seed: 4,
            ..GloveConfig::default()
        };
        let (_, log) = train_glove_logged(&m, &vocab, &config).unwrap();
        assert_eq!(log.len(), 5);
        for pair in log.windows(2) {
            assert!(pair[1] < pair[0], "loss did not decrease: {log:?}");
        }
    }

    #[test]
    fn reconstruction_improves_with_training() {
        let text = "the cat sat on the mat\nthe dog sat by the door\ncat dog mat door";
        let corpus = std::iter::repeat(text).take(10).collect::<Vec<_>>().join("\n");
        let (m, vocab) = fixture(&corpus);
        let config = GloveConfig {
            dim: 10,
            epochs: 50,
            x_max: 100.0,
            seed: 8,
            ..GloveConfig::default()
        };
        let initial = GloveTrainer::new(&vocab, &config).into_model();
        let trained = train_glove(&m, &vocab, &config).unwrap();
        let mean_abs = |model: &EmbeddingModel| {
            let cells = m.sorted_cells();
            cells
                .iter()
                .map(|&(w, c, n)| residual(model, w, c, n as f64).abs())
                .sum::<f64>()
                / cells.len() as f64
        };
        let before = mean_abs(&initial);
        let after = mean_abs(&trained);
        assert!(
            after <= 0.5 * before,
            "reconstruction error {after} vs initial {before}"
        );
    }

    #[test]
    fn empty_matrix_errors() {
        let s = tokenize_normalize(Cursor::new("alone")).unwrap();
        let v = Vocabulary::build(&s, 1).unwrap();
        let m = count_cooc(&s, &v, 2);
        assert!(matches!(
            train_glove(&m, &v, &GloveConfig::default()),
            Err(Error::EmptyMatrix)
        ));
    }
}
