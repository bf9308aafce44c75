//! Second-order propagation: for rare words, sample extra pairs from the
//! summed count rows of their first-order contexts.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand_distr::Distribution;

use crate::cooc::{SparseCoocMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::pairs::{PairCorpus, PairWriter, Vocabulary};
use crate::rng::{self, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Words with `0 < frequency < freq_threshold` are propagated.
    pub freq_threshold: u64,
    /// Draws per word as a multiple of its frequency.
    pub ratio: f64,
    pub seed: u64,
}

impl PropagationConfig {
    pub fn new(freq_threshold: u64) -> Self {
        PropagationConfig { freq_threshold, ratio: 2.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.freq_threshold < 1 {
            return Err(Error::param("frequency threshold must be at least 1"));
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return Err(Error::param(format!("ratio must be a finite value > 0, got {}", self.ratio)));
        }
        Ok(())
    }

    /// Number of draws for a word of frequency `freq`.
    pub fn draws(&self, freq: u64) -> u64 {
        (self.ratio * freq as f64).ceil() as u64
    }
}

/// Row sum of raw counts for target `t`.
pub fn cooc_frequency(counts: &SparseCoocMatrix, t: u32) -> Result<u64> {
    if t as usize >= counts.rows() {
        return Err(Error::UnknownId { id: t as usize, len: counts.rows() });
    }
    Ok(counts.row_sums()[t as usize].round() as u64)
}

/// Count matrix plus the map from context ids to the row of the same word.
#[derive(Debug, Clone)]
pub struct SecondOrder<'a> {
    counts: &'a SparseCoocMatrix,
    context_row: Vec<Option<u32>>,
}

impl<'a> SecondOrder<'a> {
    pub fn new(counts: &'a SparseCoocMatrix, targets: &Vocabulary, contexts: &Vocabulary) -> Result<Self> {
        if counts.rows() != targets.len() || counts.cols() != contexts.len() {
            return Err(Error::param("count matrix shape does not match the vocabularies"));
        }
        let context_row = contexts.words().iter().map(|w| targets.id(w)).collect();
        Ok(SecondOrder { counts, context_row })
    }

    pub fn counts(&self) -> &SparseCoocMatrix {
        self.counts
    }

    /// `Σ_c #(t,c) · row(c)`: every first-order context's own count row,
    /// weighted by how often it occurred with `t`.
    pub fn vector(&self, t: u32) -> Result<SparseVector> {
        if cooc_frequency(self.counts, t)? == 0 {
            return Err(Error::Empty(format!("word id {t} has no contexts")));
        }
        let mut acc = vec![0.0; self.counts.cols()];
        let mut touched = Vec::new();
        for (c, n) in self.counts.row(t as usize).iter() {
            let Some(r) = self.context_row[c as usize] else { continue };
            for (u, m) in self.counts.row(r as usize).iter() {
                if acc[u as usize] == 0.0 {
                    touched.push(u);
                }
                acc[u as usize] += n * m;
            }
        }
        touched.sort_unstable();
        let values = touched.iter().map(|&u| acc[u as usize]).collect();
        Ok(SparseVector { indices: touched, values })
    }
}

/// `n` draws with replacement from `v / Σv`, as context ids.
pub fn draw_contexts(v: &SparseVector, n: u64, rng: &mut SeededRng) -> Result<Vec<u32>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let dist = WeightedIndex::new(&v.values)
        .map_err(|e| Error::Empty(format!("second-order vector cannot be sampled: {e}")))?;
    Ok((0..n).map(|_| v.indices[dist.sample(rng)]).collect())
}

/// Counters from one propagation run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropagationStats {
    pub words: usize,
    pub draws: u64,
    pub self_draws: u64,
    /// Selected words whose contexts never occur as targets, so their
    /// second-order vector is empty and nothing is drawn.
    pub empty_vectors: usize,
    /// Written lines: forward pairs plus their reverses.
    pub lines: usize,
}

/// Target ids selected for propagation under `cfg`, in id order.
pub fn propagated_words(counts: &SparseCoocMatrix, cfg: &PropagationConfig) -> Vec<u32> {
    (0..counts.rows() as u32)
        .filter(|&t| {
            let f = counts.row_sums()[t as usize].round() as u64;
            f > 0 && f < cfg.freq_threshold
        })
        .collect()
}

/// Writes the propagated pairs for `corpus`. Words are visited in target id
/// order and each uses its own seed derived from `cfg.seed` and its id.
/// A draw of the word itself is dropped, not redrawn.
pub fn propagate_corpus(corpus: &PairCorpus, cfg: &PropagationConfig, out: &mut PairWriter) -> Result<PropagationStats> {
    cfg.validate()?;
    let counts = corpus.cooccurrence_counts();
    let so = SecondOrder::new(&counts, &corpus.targets, &corpus.contexts)?;
    let mut stats = PropagationStats::default();
    for t in propagated_words(&counts, cfg) {
        let word = corpus.targets.word(t).expect("id in range");
        let n = cfg.draws(cooc_frequency(&counts, t)?);
        let v = so.vector(t)?;
        if v.indices.is_empty() {
            stats.empty_vectors += 1;
            continue;
        }
        let mut rng = rng::seeded(rng::derive_seed(cfg.seed, t as u64));
        stats.words += 1;
        stats.draws += n;
        for c in draw_contexts(&v, n, &mut rng)? {
            let context = corpus.contexts.word(c).expect("id in range");
            if context == word {
                stats.self_draws += 1;
                continue;
            }
            out.write(word, context)?;
            out.write(context, word)?;
            stats.lines += 2;
        }
    }
    Ok(stats)
}

pub fn propagate(pairs: &Path, cfg: &PropagationConfig, out: &Path) -> Result<PropagationStats> {
    cfg.validate()?;
    let corpus = PairCorpus::read(pairs)?;
    if corpus.is_empty() {
        return Err(Error::Empty(format!("{} holds no pairs", pairs.display())));
    }
    let mut writer = PairWriter::create(out)?;
    let stats = propagate_corpus(&corpus, cfg, &mut writer)?;
    writer.finish()?;
    Ok(stats)
}

/// Base pairs and second-order pairs in one shuffled file.
pub fn merge_base_and_second(base: &Path, second: &Path, out: &Path, seed: u64) -> Result<usize> {
    crate::pairs::shuffle_concat(&[base, second], out, seed)
}
