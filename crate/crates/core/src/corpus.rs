//! Window-based pair extraction from tokenized text.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pairs::PairWriter;

/// Pairs `(w_i, w_j)` for every `j ≠ i` with `|i − j| ≤ window` inside one
/// sentence, in position order.
pub fn window_pairs<'a>(tokens: &[&'a str], window: usize) -> Vec<(&'a str, &'a str)> {
    let mut out = Vec::new();
    for (i, &w) in tokens.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(tokens.len() - 1);
        for (j, &c) in tokens.iter().enumerate().take(hi + 1).skip(lo) {
            if j != i {
                out.push((w, c));
            }
        }
    }
    out
}

/// Reads one whitespace-tokenized sentence per line and writes the window
/// pairs of each. Returns the number of pairs written.
pub fn extract_pairs(corpus: &Path, window: usize, out: &Path) -> Result<usize> {
    if window == 0 {
        return Err(Error::param("window must be at least 1"));
    }
    let reader = BufReader::new(File::open(corpus).map_err(|e| Error::io(corpus, e))?);
    let mut writer = PairWriter::create(out)?;
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(corpus, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        for (w, c) in window_pairs(&tokens, window) {
            writer.write(w, c)?;
        }
    }
    writer.finish()
}
