//! Fixtures shared by the criterion benchmarks.

use rand::Rng;
use secord::pairs::{PairCorpus, PairRecord};
use secord::rng::seeded;

/// Zipf-ish synthetic corpus: `n_pairs` pairs over `n_words` words.
pub fn synthetic_corpus(n_words: usize, n_pairs: usize, seed: u64) -> PairCorpus {
    let mut rng = seeded(seed);
    let mut draw = move || {
        let u: f64 = rng.random();
        ((n_words as f64).powf(u) as usize).clamp(1, n_words) - 1
    };
    let records: Vec<PairRecord> = (0..n_pairs)
        .map(|_| PairRecord::new(format!("w{}", draw()), format!("w{}", draw())).unwrap())
        .collect();
    PairCorpus::from_records(&records)
}
