//! Skip-gram with negative sampling: noise distribution, per-pair objective
//! and gradients, and the streaming trainer.
//!
//! The default mode is single-threaded and bitwise deterministic for a fixed
//! seed. With `threads > 1` workers update the shared parameters without
//! locks; callers of that mode accept run-to-run nondeterminism.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cooccur::smooth_counts;
use crate::corpus::{Sentence, Vocabulary};
use crate::model::{EmbeddingModel, ModelKind};
use crate::{Error, Result};

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// log sigma(x), computed without overflow for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Unigram noise distribution `p(c) ∝ count(c)^exponent` with a cumulative
/// table for inverse-CDF sampling.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
    exponent: f64,
}

impl NoiseDistribution {
    pub fn from_vocab(vocab: &Vocabulary, exponent: f64) -> Result<NoiseDistribution> {
        if vocab.is_empty() {
            return Err(Error::EmptyNoiseSupport);
        }
        let counts: Vec<u64> = (0..vocab.len()).map(|i| vocab.count(i)).collect();
        NoiseDistribution::from_counts(&counts, exponent)
    }

    pub fn from_counts(counts: &[u64], exponent: f64) -> Result<NoiseDistribution> {
        if counts.is_empty() {
            return Err(Error::EmptyNoiseSupport);
        }
        assert!(exponent >= 0.0, "exponent must be non-negative");
        let probabilities =
            smooth_counts(counts, exponent).map_err(|_| Error::EmptyNoiseSupport)?;
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = 0.0;
        for p in &probabilities {
            acc += p;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(NoiseDistribution {
            probabilities,
            cumulative,
            exponent,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn probability(&self, idx: usize) -> f64 {
        self.probabilities[idx]
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let x: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= x)
    }

    /// Draws one negative; a draw equal to `positive` is redrawn once and
    /// then accepted either way.
    pub fn sample_negative<R: Rng>(&self, rng: &mut R, positive: usize) -> usize {
        let first = self.sample(rng);
        if first == positive {
            self.sample(rng)
        } else {
            first
        }
    }
}

/// The per-pair objective `log sigma(v_w.u_c) + sum_n log sigma(-v_w.u_n)`.
pub fn pair_objective(
    model: &EmbeddingModel,
    w: usize,
    c_pos: usize,
    negatives: &[usize],
) -> f64 {
    let mut obj = log_sigmoid(model.score(w, c_pos));
    for &n in negatives {
        obj += log_sigmoid(-model.score(w, n));
    }
    obj
}

/// Exact gradients of [`pair_objective`] for the three parameter groups,
/// all evaluated at the current point.
pub struct PairGradients {
    pub v_w: Vec<f64>,
    pub u_pos: Vec<f64>,
    pub u_neg: Vec<Vec<f64>>,
}

pub fn pair_gradients(
    model: &EmbeddingModel,
    w: usize,
    c_pos: usize,
    negatives: &[usize],
) -> PairGradients {
    let dim = model.dim();
    let v = model.v_row(w);
    let mut v_grad = vec![0.0; dim];

    let g_pos = 1.0 - sigmoid(model.score(w, c_pos));
    let u_pos: Vec<f64> = v.iter().map(|&x| g_pos * x).collect();
    for (gv, &ux) in v_grad.iter_mut().zip(model.u_row(c_pos)) {
        *gv += g_pos * ux;
    }

    let mut u_neg = Vec::with_capacity(negatives.len());
    for &n in negatives {
        let g = -sigmoid(model.score(w, n));
        u_neg.push(v.iter().map(|&x| g * x).collect());
        for (gv, &ux) in v_grad.iter_mut().zip(model.u_row(n)) {
            *gv += g * ux;
        }
    }

    PairGradients {
        v_w: v_grad,
        u_pos,
        u_neg,
    }
}

/// One ascent step on the pair objective. The context updates use the
/// pre-step word vector and the word update uses the pre-step context
/// vectors, so all gradients are taken at the same point.
pub fn sgns_step(
    model: &mut EmbeddingModel,
    w: usize,
    c_pos: usize,
    negatives: &[usize],
    lr: f64,
) -> Result<()> {
    let dim = model.dim();
    let mut dv = vec![0.0; dim];
    raw_step(
        RawParams::from_model(model),
        dim,
        w,
        c_pos,
        negatives,
        lr,
        &mut dv,
    );
    check_rows_finite(model, w, c_pos, negatives)
}

fn check_rows_finite(
    model: &EmbeddingModel,
    w: usize,
    c_pos: usize,
    negatives: &[usize],
) -> Result<()> {
    let finite = model.v_row(w).iter().all(|x| x.is_finite())
        && model.u_row(c_pos).iter().all(|x| x.is_finite())
        && negatives
            .iter()
            .all(|&n| model.u_row(n).iter().all(|x| x.is_finite()));
    if finite {
        Ok(())
    } else {
        Err(Error::Divergence {
            context: "sgns_step".into(),
        })
    }
}

/// Raw parameter access used by both the deterministic and the lock-free
/// paths. Element reads and writes go through raw pointers; in multi-worker
/// mode concurrent updates race by contract.
#[derive(Clone, Copy)]
struct RawParams {
    v: *mut f64,
    u: *mut f64,
}

unsafe impl Send for RawParams {}
unsafe impl Sync for RawParams {}

impl RawParams {
    fn from_model(model: &mut EmbeddingModel) -> RawParams {
        let (v, u) = model.raw_buffers_mut();
        RawParams {
            v: v.as_mut_ptr(),
            u: u.as_mut_ptr(),
        }
    }

    #[inline]
    fn v_at(&self, i: usize) -> f64 {
        unsafe { self.v.add(i).read() }
    }

    #[inline]
    fn u_at(&self, i: usize) -> f64 {
        unsafe { self.u.add(i).read() }
    }

    #[inline]
    fn v_add(&self, i: usize, delta: f64) {
        unsafe {
            let p = self.v.add(i);
            p.write(p.read() + delta);
        }
    }

    #[inline]
    fn u_add(&self, i: usize, delta: f64) {
        unsafe {
            let p = self.u.add(i);
            p.write(p.read() + delta);
        }
    }
}

/// Shared update rule. Returns the pre-update objective value.
fn raw_step(
    params: RawParams,
    dim: usize,
    w: usize,
    c_pos: usize,
    negatives: &[usize],
    lr: f64,
    dv: &mut [f64],
) -> f64 {
    let wo = w * dim;
    dv.fill(0.0);
    let mut objective = 0.0;

    let co = c_pos * dim;
    let mut score = 0.0;
    for d in 0..dim {
        score += params.v_at(wo + d) * params.u_at(co + d);
    }
    objective += log_sigmoid(score);
    let g = lr * (1.0 - sigmoid(score));
    for d in 0..dim {
        dv[d] += g * params.u_at(co + d);
        params.u_add(co + d, g * params.v_at(wo + d));
    }

    for &n in negatives {
        let no = n * dim;
        let mut score = 0.0;
        for d in 0..dim {
            score += params.v_at(wo + d) * params.u_at(no + d);
        }
        objective += log_sigmoid(-score);
        let g = -lr * sigmoid(score);
        for d in 0..dim {
            dv[d] += g * params.u_at(no + d);
            params.u_add(no + d, g * params.v_at(wo + d));
        }
    }

    for d in 0..dim {
        params.v_add(wo + d, dv[d]);
    }
    objective
}

#[derive(Debug, Clone)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub noise_exponent: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for SgnsConfig {
    fn default() -> SgnsConfig {
        SgnsConfig {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_start: 0.025,
            noise_exponent: 0.75,
            seed: 1,
            threads: 1,
        }
    }
}

/// Word vectors start uniform in `(-0.5/d, 0.5/d)`, context vectors at zero.
pub fn init_model(vocab: &Vocabulary, dim: usize, seed: u64) -> EmbeddingModel {
    let words: Vec<String> = vocab.words().map(str::to_string).collect();
    let mut model = EmbeddingModel::zeros(ModelKind::Sgns, words, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 / dim as f64;
    for w in 0..vocab.len() {
        for x in model.v_row_mut(w) {
            *x = rng.gen_range(-half..half);
        }
    }
    model
}

/// Trains on the token stream, pairing each center word with every context
/// inside the symmetric window (the same pairs the co-occurrence counter
/// sees). The learning rate decays linearly from `lr_start` down to
/// `lr_start / 1e4` over all scheduled pairs.
pub fn train_sgns(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    config: &SgnsConfig,
) -> Result<EmbeddingModel> {
    train_sgns_logged(sentences, vocab, config).map(|(model, _)| model)
}

/// [`train_sgns`] that also reports the mean objective per epoch (measured on
/// the pre-update scores as training passes over the data).
pub fn train_sgns_logged(
    sentences: &[Sentence],
    vocab: &Vocabulary,
    config: &SgnsConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    let noise = NoiseDistribution::from_vocab(vocab, config.noise_exponent)?;
    let mut model = init_model(vocab, config.dim, config.seed);
    if config.epochs == 0 {
        return Ok((model, Vec::new()));
    }

    let ids: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index_of(t)).collect())
        .filter(|ids: &Vec<usize>| ids.len() >= 2)
        .collect();
    let pairs_per_epoch: u64 = ids.iter().map(|s| pair_count(s.len(), config.window)).sum();
    if pairs_per_epoch == 0 {
        return Ok((model, vec![0.0; config.epochs]));
    }
    let total_pairs = pairs_per_epoch * config.epochs as u64;

    if config.threads > 1 {
        let log = train_hogwild(&mut model, &ids, &noise, config, total_pairs)?;
        return Ok((model, log));
    }

    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5EED));
    let mut dv = vec![0.0; dim];
    let mut negatives = vec![0usize; config.negatives];
    let mut step = 0u64;
    let mut epoch_log = Vec::with_capacity(config.epochs);
    let params = RawParams::from_model(&mut model);

    for _ in 0..config.epochs {
        let mut objective_sum = 0.0;
        for sentence in &ids {
            for (i, &w) in sentence.iter().enumerate() {
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(sentence.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let c = sentence[j];
                    for slot in negatives.iter_mut() {
                        *slot = noise.sample_negative(&mut rng, c);
                    }
                    let lr = decayed_lr(config.lr_start, step, total_pairs);
                    objective_sum +=
                        raw_step(params, dim, w, c, &negatives, lr, &mut dv);
                    step += 1;
                }
            }
        }
        epoch_log.push(objective_sum / pairs_per_epoch as f64);
    }

    if !model.is_finite() {
        return Err(Error::Divergence {
            context: "train_sgns".into(),
        });
    }
    Ok((model, epoch_log))
}

fn pair_count(len: usize, window: usize) -> u64 {
    let mut n = 0u64;
    for i in 0..len {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(len - 1);
        n += (hi - lo) as u64;
    }
    n
}

fn decayed_lr(lr_start: f64, step: u64, total: u64) -> f64 {
    let remaining = 1.0 - step as f64 / total as f64;
    lr_start * remaining.max(1e-4)
}

/// Lock-free multi-worker training: sentence shards, one RNG per worker, a
/// shared step counter for the decay schedule, racy parameter updates.
fn train_hogwild(
    model: &mut EmbeddingModel,
    ids: &[Vec<usize>],
    noise: &NoiseDistribution,
    config: &SgnsConfig,
    total_pairs: u64,
) -> Result<Vec<f64>> {
    use std::sync::atomic::{AtomicU64, Ordering};

    let dim = config.dim;
    let params = RawParams::from_model(model);
    let step = AtomicU64::new(0);
    let chunk = ids.len().div_ceil(config.threads).max(1);

    std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .chunks(chunk)
            .enumerate()
            .map(|(t, shard)| {
                let step = &step;
                let noise = &noise;
                scope.spawn(move || {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5EED + t as u64));
                    let mut dv = vec![0.0; dim];
                    let mut negatives = vec![0usize; config.negatives];
                    for _ in 0..config.epochs {
                        for sentence in shard {
                            for (i, &w) in sentence.iter().enumerate() {
                                let lo = i.saturating_sub(config.window);
                                let hi = (i + config.window).min(sentence.len() - 1);
                                for j in lo..=hi {
                                    if j == i {
                                        continue;
                                    }
                                    let c = sentence[j];
                                    for slot in negatives.iter_mut() {
                                        *slot = noise.sample_negative(&mut rng, c);
                                    }
                                    let now = step.fetch_add(1, Ordering::Relaxed);
                                    let lr =
                                        decayed_lr(config.lr_start, now, total_pairs);
                                    raw_step(params, dim, w, c, &negatives, lr, &mut dv);
                                }
                            }
                        }
                    }
                })
            })
            .collect();
        for handle in handles {
            handle.join().expect("training worker panicked");
        }
    });

    if !model.is_finite() {
        return Err(Error::Divergence {
            context: "train_sgns (parallel)".into(),
        });
    }
    Ok(Vec::new())
}
