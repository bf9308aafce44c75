//! Cosine geometry, group scores, word-similarity benchmarks and the
//! two-sample bootstrap.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;

use crate::cooc::{SparseCoocMatrix, SparseRow};
use crate::embedding::DenseEmbedding;
use crate::error::{Error, Result};
use crate::pairs::Vocabulary;
use crate::rng;
use crate::simgen::{GroupKind, GroupManifest};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WordVector<'a> {
    Dense(&'a [f64]),
    Sparse(SparseRow<'a>),
}

impl WordVector<'_> {
    fn norm_sq(&self) -> f64 {
        match self {
            WordVector::Dense(x) => x.iter().map(|v| v * v).sum(),
            WordVector::Sparse(x) => x.values.iter().map(|v| v * v).sum(),
        }
    }

    fn dot(&self, other: &WordVector<'_>) -> Result<f64> {
        match (self, other) {
            (WordVector::Dense(x), WordVector::Dense(y)) => {
                if x.len() != y.len() {
                    return Err(Error::param(format!("dimension mismatch: {} vs {}", x.len(), y.len())));
                }
                Ok(x.iter().zip(y.iter()).map(|(a, b)| a * b).sum())
            }
            (WordVector::Sparse(x), WordVector::Sparse(y)) => {
                let (mut i, mut j, mut acc) = (0, 0, 0.0);
                while i < x.indices.len() && j < y.indices.len() {
                    match x.indices[i].cmp(&y.indices[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += x.values[i] * y.values[j];
                            i += 1;
                            j += 1;
                        }
                    }
                }
                Ok(acc)
            }
            (WordVector::Sparse(s), WordVector::Dense(d)) | (WordVector::Dense(d), WordVector::Sparse(s)) => {
                s.iter()
                    .map(|(k, v)| {
                        d.get(k as usize)
                            .map(|x| x * v)
                            .ok_or_else(|| Error::param("sparse index beyond dense dimension"))
                    })
                    .sum()
            }
        }
    }
}

/// `1 − cos(x, y)`. A zero vector has no direction and is an error.
pub fn cosine_distance(x: WordVector<'_>, y: WordVector<'_>) -> Result<f64> {
    let (nx, ny) = (x.norm_sq(), y.norm_sq());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector(if nx == 0.0 { "first argument" } else { "second argument" }.into()));
    }
    let cos = x.dot(&y)? / (nx.sqrt() * ny.sqrt());
    Ok((1.0 - cos).clamp(0.0, 2.0))
}

/// Word to vector lookup shared by the dense and sparse models.
pub trait VectorSpace {
    fn lookup(&self, word: &str) -> Option<WordVector<'_>>;

    fn distance(&self, a: &str, b: &str) -> Result<f64> {
        let x = self.lookup(a).ok_or_else(|| Error::UnknownWord(a.to_string()))?;
        let y = self.lookup(b).ok_or_else(|| Error::UnknownWord(b.to_string()))?;
        cosine_distance(x, y).map_err(|e| match e {
            Error::ZeroVector(_) => Error::ZeroVector(format!("`{a}` or `{b}`")),
            e => e,
        })
    }
}

impl VectorSpace for DenseEmbedding {
    fn lookup(&self, word: &str) -> Option<WordVector<'_>> {
        self.vector(word).map(WordVector::Dense)
    }
}

/// Rows of a sparse matrix (e.g. PPMI) as word vectors.
#[derive(Debug, Clone)]
pub struct SparseSpace {
    vocab: Vocabulary,
    matrix: SparseCoocMatrix,
}

impl SparseSpace {
    pub fn new(vocab: Vocabulary, matrix: SparseCoocMatrix) -> Result<Self> {
        if vocab.len() != matrix.rows() {
            return Err(Error::param(format!(
                "vocabulary has {} words but the matrix has {} rows",
                vocab.len(),
                matrix.rows()
            )));
        }
        Ok(SparseSpace { vocab, matrix })
    }

    pub fn matrix(&self) -> &SparseCoocMatrix {
        &self.matrix
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }
}

impl VectorSpace for SparseSpace {
    fn lookup(&self, word: &str) -> Option<WordVector<'_>> {
        self.vocab.id(word).map(|id| WordVector::Sparse(self.matrix.row(id as usize)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupScore {
    pub label: String,
    pub mean: f64,
    /// One distance per unordered target pair, in `(i, j)` order with `i < j`.
    pub distances: Vec<f64>,
}

/// Mean cosine distance over all unordered pairs of the group's targets.
pub fn group_mean_cd<S: VectorSpace + ?Sized>(space: &S, manifest: &GroupManifest, group: GroupKind) -> Result<GroupScore> {
    let targets = manifest
        .targets(group)
        .ok_or_else(|| Error::param(format!("group {group} is not in the manifest")))?;
    if targets.len() < 2 {
        return Err(Error::param(format!("group {group} needs at least two targets")));
    }
    let mut distances = Vec::with_capacity(targets.len() * (targets.len() - 1) / 2);
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            distances.push(space.distance(&targets[i], &targets[j])?);
        }
    }
    Ok(GroupScore {
        label: group.label().to_string(),
        mean: mean(&distances),
        distances,
    })
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Undefined("correlation of a constant sequence".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::param("spearman needs at least two observations"));
    }
    if let Some(index) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::param(format!("non-finite value at position {}", index % a.len())));
    }
    pearson(&average_ranks(a), &average_ranks(b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRecord {
    pub word1: String,
    pub word2: String,
    pub score: f64,
}

/// Word pairs with human similarity scores; no unordered pair repeats.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityDataset {
    records: Vec<SimilarityRecord>,
}

impl SimilarityDataset {
    pub fn new(records: Vec<SimilarityRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !r.score.is_finite() {
                return Err(Error::param(format!("score for ({}, {}) is not finite", r.word1, r.word2)));
            }
            let key = if r.word1 <= r.word2 { (&r.word1, &r.word2) } else { (&r.word2, &r.word1) };
            if !seen.insert(key) {
                return Err(Error::param(format!("duplicate pair ({}, {})", r.word1, r.word2)));
            }
        }
        Ok(SimilarityDataset { records })
    }

    pub fn records(&self) -> &[SimilarityRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `<word1>\t<word2>\t<score>` per line.
    pub fn read(path: &Path) -> Result<Self> {
        Self::read_with(path, '\t', false)
    }

    /// Comma-separated variant; a first line whose score does not parse is
    /// taken as a header.
    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::read_with(path, ',', true)
    }

    fn read_with(path: &Path, sep: char, allow_header: bool) -> Result<Self> {
        let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let parse = |message: String| Error::Parse { path: path.to_path_buf(), line: i + 1, message };
            let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
            let [w1, w2, score] = fields[..] else {
                return Err(parse(format!("expected 3 fields, found {}", fields.len())));
            };
            let score = match score.parse::<f64>() {
                Ok(s) => s,
                Err(_) if allow_header && i == 0 => continue,
                Err(e) => return Err(parse(format!("bad score `{score}`: {e}"))),
            };
            records.push(SimilarityRecord { word1: w1.to_string(), word2: w2.to_string(), score });
        }
        Self::new(records).map_err(|e| match e {
            Error::Parameter(message) => Error::Parse { path: path.to_path_buf(), line: 0, message },
            e => e,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        for r in &self.records {
            writeln!(w, "{}\t{}\t{}", r.word1, r.word2, r.score).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Spearman agreement of model similarities with human scores.
#[derive(Debug, Clone, PartialEq)]
pub struct WordSimResult {
    /// `None` when ρ is undefined (fewer than two pairs or constant input).
    pub rho: Option<f64>,
    pub evaluated: usize,
    pub total: usize,
}

impl WordSimResult {
    pub fn coverage(&self) -> f64 {
        self.evaluated as f64 / self.total as f64
    }
}

/// Pairs with an unknown word, or a word whose vector is zero, are skipped and
/// show up in the coverage.
pub fn eval_wordsim<S: VectorSpace + ?Sized>(space: &S, dataset: &SimilarityDataset) -> Result<WordSimResult> {
    if dataset.is_empty() {
        return Err(Error::Empty("similarity dataset is empty".into()));
    }
    let mut predicted = Vec::new();
    let mut human = Vec::new();
    for r in dataset.records() {
        match space.distance(&r.word1, &r.word2) {
            Ok(cd) => {
                predicted.push(1.0 - cd);
                human.push(r.score);
            }
            Err(Error::UnknownWord(_) | Error::ZeroVector(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if predicted.is_empty() {
        return Err(Error::Empty("no dataset pair is covered by the model".into()));
    }
    let rho = match spearman(&predicted, &human) {
        Ok(r) => Some(r),
        Err(Error::Undefined(_) | Error::Parameter(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(WordSimResult { rho, evaluated: predicted.len(), total: dataset.len() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapResult {
    pub p: f64,
    /// `|mean(a) − mean(b)|`.
    pub observed: f64,
    /// Set when every pooled value is equal; `p` is then 1.
    pub degenerate: bool,
}

pub const DEFAULT_BOOTSTRAP_SAMPLES: usize = 10_000;

fn canonical_first(a: &[f64], b: &[f64]) -> bool {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    }) != std::cmp::Ordering::Greater
}

fn resample_mean<R: Rng>(x: &[f64], rng: &mut R) -> f64 {
    let n = x.len();
    (0..n).map(|_| x[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Two-tailed bootstrap test of equal means. Both samples are shifted onto
/// the pooled mean and resampled `b_reps` times; `p = (1 + #{|Δ*| ≥ |Δ|}) /
/// (b_reps + 1)`. The samples are put in a canonical order first, so the
/// result does not depend on which one is passed as `a`.
pub fn bootstrap_two_sample(a: &[f64], b: &[f64], b_reps: usize, seed: u64) -> Result<BootstrapResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::param("both samples need at least two values"));
    }
    if b_reps < 1000 {
        return Err(Error::param(format!("at least 1000 bootstrap samples are required, got {b_reps}")));
    }
    if let Some(index) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::param(format!("non-finite value at pooled position {index}")));
    }
    let (a, b) = if canonical_first(a, b) { (a, b) } else { (b, a) };
    let observed = (mean(a) - mean(b)).abs();
    let first = a[0];
    if a.iter().chain(b).all(|&v| v == first) {
        return Ok(BootstrapResult { p: 1.0, observed, degenerate: true });
    }

    let pooled = (a.iter().sum::<f64>() + b.iter().sum::<f64>()) / (a.len() + b.len()) as f64;
    let shift = |x: &[f64]| -> Vec<f64> {
        let m = mean(x);
        x.iter().map(|v| v - m + pooled).collect()
    };
    let (a0, b0) = (shift(a), shift(b));
    let mut rng = rng::seeded(seed);
    let mut exceed = 0usize;
    for _ in 0..b_reps {
        let stat = (resample_mean(&a0, &mut rng) - resample_mean(&b0, &mut rng)).abs();
        if stat >= observed {
            exceed += 1;
        }
    }
    Ok(BootstrapResult {
        p: (1 + exceed) as f64 / (b_reps + 1) as f64,
        observed,
        degenerate: false,
    })
}

/// `min(1, m · p)`.
pub fn bonferroni(p: f64, m: usize) -> f64 {
    (p * m.max(1) as f64).min(1.0)
}
