//! Skip-gram with negative sampling, trained directly on a pair stream.
//!
//! For an observed pair `(w, c)` and noise contexts `c'_1..c'_k` the per-pair
//! objective is
//!
//! ```text
//! ℓ = log σ(v_c · v_w) + Σ_i log σ(−v_{c'_i} · v_w)
//! ```
//!
//! and each update is one stochastic ascent step on ℓ. Training passes over
//! the pairs in file order; shuffling is left to the pair store.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::Rng;

use crate::embedding::{DenseEmbedding, DenseMatrix};
use crate::error::{Error, Result};
use crate::pairs::{PairCorpus, Vocabulary};
use crate::rng::{self, SeededRng};

/// Logistic function, evaluated without overflow for any finite input.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Lowest step size reached by the linear schedule, relative to `lr0`.
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr0: f64,
    pub seed: u64,
    /// Noise distribution is proportional to `#(c)^noise_exponent`; 1.0 is the
    /// plain unigram distribution.
    pub noise_exponent: f64,
    /// Worker threads. Anything above 1 switches to lock-free racy updates,
    /// which are not reproducible.
    pub threads: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 300,
            negatives: 5,
            epochs: 5,
            lr0: 0.025,
            seed: 0,
            noise_exponent: 1.0,
            threads: 1,
        }
    }
}

impl SgnsConfig {
    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.epochs == 0 || self.threads == 0 {
            return Err(Error::param("dim, epochs and threads must be at least 1"));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::param(format!("initial step size must be positive, got {}", self.lr0)));
        }
        if !(self.noise_exponent >= 0.0 && self.noise_exponent.is_finite()) {
            return Err(Error::param("noise exponent must be a finite non-negative value"));
        }
        Ok(())
    }
}

/// Cumulative noise distribution over context ids, sampled by inverse CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTable {
    cdf: Vec<f64>,
}

impl NoiseTable {
    pub fn new(counts: &[u64], exponent: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty("noise distribution over an empty vocabulary".into()));
        }
        let weights: Vec<f64> = counts
            .iter()
            .map(|&n| if n == 0 { 0.0 } else { (n as f64).powf(exponent) })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Empty("noise distribution has no mass".into()));
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        // Pin the tail so every uniform draw in [0, 1) lands on a bucket.
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap();
        cdf[last_positive..].fill(1.0);
        Ok(NoiseTable { cdf })
    }

    pub fn from_vocab(vocab: &Vocabulary, exponent: f64) -> Result<Self> {
        NoiseTable::new(vocab.counts(), exponent)
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn probability(&self, id: u32) -> f64 {
        let i = id as usize;
        let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        self.cdf[i] - prev
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&p| p <= u) as u32
    }
}

/// Gradient of ℓ for one update: with respect to `v_w`, and one entry per
/// context occurrence (positive first, then negatives in order).
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub target: Vec<f64>,
    pub contexts: Vec<(u32, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct SgnsModel {
    target: DenseMatrix,
    context: DenseMatrix,
    config: SgnsConfig,
    grad: Vec<f64>,
    coef: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += alpha * x;
    }
}

impl SgnsModel {
    /// Target rows uniform in `[-0.5/d, 0.5/d]`, context rows zero.
    pub fn new(n_targets: usize, n_contexts: usize, config: SgnsConfig) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        let mut init = rng::seeded(rng::derive_seed(config.seed, 0));
        let half = 0.5 / d as f64;
        let target = DenseMatrix::from_fn(n_targets, d, |_, _| init.random_range(-half..=half));
        Ok(SgnsModel {
            target,
            context: DenseMatrix::zeros(n_contexts, d),
            config,
            grad: vec![0.0; d],
            coef: Vec::new(),
        })
    }

    pub fn from_parts(target: DenseMatrix, context: DenseMatrix, config: SgnsConfig) -> Result<Self> {
        config.validate()?;
        if target.cols() != config.dim || context.cols() != config.dim {
            return Err(Error::param("matrix widths must equal the configured dimension"));
        }
        let d = config.dim;
        Ok(SgnsModel {
            target,
            context,
            config,
            grad: vec![0.0; d],
            coef: Vec::new(),
        })
    }

    pub fn config(&self) -> &SgnsConfig {
        &self.config
    }

    pub fn target_vectors(&self) -> &DenseMatrix {
        &self.target
    }

    pub fn context_vectors(&self) -> &DenseMatrix {
        &self.context
    }

    fn check_ids(&self, w: u32, contexts: impl IntoIterator<Item = u32>) -> Result<()> {
        if w as usize >= self.target.rows() {
            return Err(Error::UnknownId { id: w as usize, len: self.target.rows() });
        }
        for c in contexts {
            if c as usize >= self.context.rows() {
                return Err(Error::UnknownId { id: c as usize, len: self.context.rows() });
            }
        }
        Ok(())
    }

    /// ℓ at the current parameters.
    pub fn pair_objective(&self, w: u32, c: u32, negatives: &[u32]) -> Result<f64> {
        self.check_ids(w, std::iter::once(c).chain(negatives.iter().copied()))?;
        let vw = self.target.row(w as usize);
        let pos = sigmoid(dot(self.context.row(c as usize), vw)).ln();
        let neg: f64 = negatives
            .iter()
            .map(|&n| sigmoid(-dot(self.context.row(n as usize), vw)).ln())
            .sum();
        Ok(pos + neg)
    }

    pub fn pair_gradient(&self, w: u32, c: u32, negatives: &[u32]) -> Result<PairGradient> {
        self.check_ids(w, std::iter::once(c).chain(negatives.iter().copied()))?;
        let vw = self.target.row(w as usize);
        let mut target = vec![0.0; self.config.dim];
        let mut contexts = Vec::with_capacity(1 + negatives.len());
        for (k, ctx) in std::iter::once(c).chain(negatives.iter().copied()).enumerate() {
            let vc = self.context.row(ctx as usize);
            let s = sigmoid(dot(vc, vw));
            let g = if k == 0 { 1.0 - s } else { -s };
            axpy(g, vc, &mut target);
            contexts.push((ctx, vw.iter().map(|x| g * x).collect()));
        }
        Ok(PairGradient { target, contexts })
    }

    /// One ascent step of size `lr`. Every gradient is taken at the pre-step
    /// parameters, so repeated ids in `negatives` accumulate.
    pub fn update_pair(&mut self, w: u32, c: u32, negatives: &[u32], lr: f64) -> Result<()> {
        if lr.is_nan() || lr <= 0.0 {
            return Err(Error::param(format!("step size must be positive, got {lr}")));
        }
        self.check_ids(w, std::iter::once(c).chain(negatives.iter().copied()))?;
        if self.step(w, c, negatives, lr) {
            Ok(())
        } else {
            Err(Error::NonFinite { index: 0 })
        }
    }

    /// Unchecked update; returns false if a score went non-finite.
    fn step(&mut self, w: u32, c: u32, negatives: &[u32], lr: f64) -> bool {
        let vw = self.target.row(w as usize);
        self.grad.fill(0.0);
        self.coef.clear();
        for (k, ctx) in std::iter::once(c).chain(negatives.iter().copied()).enumerate() {
            let vc = self.context.row(ctx as usize);
            let score = dot(vc, vw);
            if !score.is_finite() {
                return false;
            }
            let s = sigmoid(score);
            let g = if k == 0 { 1.0 - s } else { -s };
            self.coef.push(g);
            axpy(g, vc, &mut self.grad);
        }
        for (k, ctx) in std::iter::once(c).chain(negatives.iter().copied()).enumerate() {
            let vw = self.target.row(w as usize);
            let g = lr * self.coef[k];
            // Split borrow: target and context live in different matrices.
            let vc = self.context.row_mut(ctx as usize);
            axpy(g, vw, vc);
        }
        axpy(lr, &self.grad, self.target.row_mut(w as usize));
        true
    }

    /// `M^SGNS = W`: the target vectors as an embedding.
    pub fn embedding(&self, targets: &Vocabulary) -> Result<DenseEmbedding> {
        DenseEmbedding::new(targets.clone(), self.target.clone())
    }

    pub fn into_embedding(self, targets: &Vocabulary) -> Result<DenseEmbedding> {
        DenseEmbedding::new(targets.clone(), self.target)
    }

    /// Writes W and C in the embedding text format and the hyperparameters
    /// as `key=value` lines.
    pub fn write(
        &self,
        targets: &Vocabulary,
        contexts: &Vocabulary,
        target_path: &Path,
        context_path: &Path,
        meta_path: &Path,
    ) -> Result<()> {
        DenseEmbedding::new(targets.clone(), self.target.clone())?.write(target_path)?;
        DenseEmbedding::new(contexts.clone(), self.context.clone())?.write(context_path)?;
        let io = |e| Error::io(meta_path, e);
        let mut w = BufWriter::new(File::create(meta_path).map_err(io)?);
        let c = &self.config;
        writeln!(
            w,
            "dim={}\nnegatives={}\nepochs={}\nlr0={}\nseed={}\nnoise_exponent={}\nthreads={}",
            c.dim, c.negatives, c.epochs, c.lr0, c.seed, c.noise_exponent, c.threads
        )
        .map_err(io)?;
        w.flush().map_err(io)
    }
}

fn learning_rate(lr0: f64, done: usize, total: usize) -> f64 {
    let progress = done as f64 / total as f64;
    lr0 * (1.0 - (1.0 - MIN_LR_FRACTION) * progress)
}

/// Trains on `corpus` for `config.epochs` passes in pair order.
pub fn train_sgns(corpus: &PairCorpus, config: &SgnsConfig) -> Result<SgnsModel> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Empty("no pairs to train on".into()));
    }
    let noise = NoiseTable::from_vocab(&corpus.contexts, config.noise_exponent)?;
    let mut model = SgnsModel::new(corpus.targets.len(), corpus.contexts.len(), config.clone())?;
    if config.threads > 1 {
        train_racy(&mut model, corpus, &noise)?;
    } else {
        train_sequential(&mut model, corpus, &noise)?;
    }
    if !(model.target.is_finite() && model.context.is_finite()) {
        return Err(Error::NonFinite { index: corpus.len() * config.epochs });
    }
    Ok(model)
}

fn train_sequential(model: &mut SgnsModel, corpus: &PairCorpus, noise: &NoiseTable) -> Result<()> {
    let cfg = model.config.clone();
    let total = corpus.len() * cfg.epochs;
    let mut rng: SeededRng = rng::seeded(rng::derive_seed(cfg.seed, 1));
    let mut negatives = vec![0u32; cfg.negatives];
    let mut done = 0;
    for _ in 0..cfg.epochs {
        for &(w, c) in &corpus.pairs {
            for n in negatives.iter_mut() {
                *n = noise.sample(&mut rng);
            }
            let lr = learning_rate(cfg.lr0, done, total);
            if !model.step(w, c, &negatives, lr) {
                return Err(Error::NonFinite { index: done });
            }
            done += 1;
        }
    }
    Ok(())
}

/// Hogwild-style training: workers own contiguous shards of the pairs and
/// update shared parameters without locks. Each value is an atomic cell, so
/// races lose updates but never tear a float.
fn train_racy(model: &mut SgnsModel, corpus: &PairCorpus, noise: &NoiseTable) -> Result<()> {
    let cfg = model.config.clone();
    let d = cfg.dim;
    let to_atomic = |m: &DenseMatrix| -> Vec<AtomicU64> {
        m.as_slice().iter().map(|v| AtomicU64::new(v.to_bits())).collect()
    };
    let target = to_atomic(&model.target);
    let context = to_atomic(&model.context);
    let total = corpus.len() * cfg.epochs;
    let progress = AtomicUsize::new(0);
    let failed = AtomicUsize::new(usize::MAX);
    let shard = corpus.len().div_ceil(cfg.threads);

    std::thread::scope(|scope| {
        for (t, pairs) in corpus.pairs.chunks(shard).enumerate() {
            let (target, context, progress, failed) = (&target, &context, &progress, &failed);
            scope.spawn(move || {
                let load = |cells: &[AtomicU64], i: usize| f64::from_bits(cells[i].load(Ordering::Relaxed));
                let store = |cells: &[AtomicU64], i: usize, v: f64| cells[i].store(v.to_bits(), Ordering::Relaxed);
                let mut rng = rng::seeded(rng::derive_seed(cfg.seed, 2 + t as u64));
                let mut vw = vec![0.0; d];
                let mut grad = vec![0.0; d];
                let mut ctxs = vec![0u32; 1 + cfg.negatives];
                let mut coef = vec![0.0; 1 + cfg.negatives];
                for _ in 0..cfg.epochs {
                    for &(w, c) in pairs {
                        if failed.load(Ordering::Relaxed) != usize::MAX {
                            return;
                        }
                        let done = progress.fetch_add(1, Ordering::Relaxed);
                        let lr = learning_rate(cfg.lr0, done, total);
                        ctxs[0] = c;
                        for n in ctxs[1..].iter_mut() {
                            *n = noise.sample(&mut rng);
                        }
                        let wb = w as usize * d;
                        for (i, x) in vw.iter_mut().enumerate() {
                            *x = load(target, wb + i);
                        }
                        grad.fill(0.0);
                        for (k, &ctx) in ctxs.iter().enumerate() {
                            let cb = ctx as usize * d;
                            let score: f64 = (0..d).map(|i| load(context, cb + i) * vw[i]).sum();
                            if !score.is_finite() {
                                failed.fetch_min(done, Ordering::Relaxed);
                                return;
                            }
                            let s = sigmoid(score);
                            coef[k] = if k == 0 { 1.0 - s } else { -s };
                            for (i, g) in grad.iter_mut().enumerate() {
                                *g += coef[k] * load(context, cb + i);
                            }
                        }
                        for (k, &ctx) in ctxs.iter().enumerate() {
                            let cb = ctx as usize * d;
                            for i in 0..d {
                                store(context, cb + i, load(context, cb + i) + lr * coef[k] * vw[i]);
                            }
                        }
                        for i in 0..d {
                            store(target, wb + i, vw[i] + lr * grad[i]);
                        }
                    }
                }
            });
        }
    });

    let index = failed.into_inner();
    if index != usize::MAX {
        return Err(Error::NonFinite { index });
    }
    let from_atomic = |cells: Vec<AtomicU64>, rows: usize| {
        let data = cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect();
        DenseMatrix::from_vec(rows, d, data)
    };
    model.target = from_atomic(target, model.target.rows())?;
    model.context = from_atomic(context, model.context.rows())?;
    Ok(())
}
