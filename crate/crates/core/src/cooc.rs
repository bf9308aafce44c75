//! Sparse word-context co-occurrence matrices and PPMI weighting.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pairs::{PairCorpus, PairRecord, Vocabulary};

/// Borrowed view of one sparse row: strictly increasing column ids with
/// their (nonzero) values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseRow<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f64],
}

impl<'a> SparseRow<'a> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + 'a {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Owned sparse vector with sorted, unique indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn as_row(&self) -> SparseRow<'_> {
        SparseRow {
            indices: &self.indices,
            values: &self.values,
        }
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }
}

/// Row-compressed (CSR) matrix over (target id, context id).
///
/// Invariants: no stored zero, column ids strictly increasing within a row,
/// cached row and column sums agree with the stored entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoocMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
}

impl SparseCoocMatrix {
    fn from_sorted_parts(rows: usize, cols: usize, indptr: Vec<usize>, indices: Vec<u32>, values: Vec<f64>) -> Self {
        let mut row_sums = vec![0.0; rows];
        let mut col_sums = vec![0.0; cols];
        for r in 0..rows {
            for k in indptr[r]..indptr[r + 1] {
                row_sums[r] += values[k];
                col_sums[indices[k] as usize] += values[k];
            }
        }
        SparseCoocMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
            row_sums,
            col_sums,
        }
    }

    /// Counts how often each `(row, col)` id pair occurs.
    pub fn from_id_pairs(rows: usize, cols: usize, pairs: &[(u32, u32)]) -> Self {
        let mut keys: Vec<u64> = pairs
            .iter()
            .map(|&(r, c)| {
                assert!((r as usize) < rows && (c as usize) < cols, "id pair out of range");
                (u64::from(r) << 32) | u64::from(c)
            })
            .collect();
        keys.sort_unstable();

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut i = 0;
        while i < keys.len() {
            let key = keys[i];
            let mut j = i + 1;
            while j < keys.len() && keys[j] == key {
                j += 1;
            }
            let (r, c) = ((key >> 32) as usize, key as u32);
            indptr[r + 1] += 1;
            indices.push(c);
            values.push((j - i) as f64);
            i = j;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self::from_sorted_parts(rows, cols, indptr, indices, values)
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate cells are
    /// summed and cells summing to zero are not stored.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, f64)>,
    {
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r as usize >= rows || c as usize >= cols {
                return Err(Error::param(format!("cell ({r}, {c}) outside a {rows}x{cols} matrix")));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(format!("cell ({r}, {c}) has invalid value {v}")));
            }
            entries.push((r, c, v));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            let mut j = i + 1;
            while j < entries.len() && entries[j].0 == r && entries[j].1 == c {
                v += entries[j].2;
                j += 1;
            }
            if v != 0.0 {
                indptr[r as usize + 1] += 1;
                indices.push(c);
                values.push(v);
            }
            i = j;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self::from_sorted_parts(rows, cols, indptr, indices, values))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> SparseRow<'_> {
        let span = self.indptr[r]..self.indptr[r + 1];
        SparseRow {
            indices: &self.indices[span.clone()],
            values: &self.values[span],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = self.row(r);
        match row.indices.binary_search(&(c as u32)) {
            Ok(pos) => row.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).iter().map(move |(c, v)| (r as u32, c, v)))
    }

    pub fn transpose(&self) -> SparseCoocMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k] as usize;
                indices[next[c]] = r as u32;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        SparseCoocMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
        }
    }

    /// `out = self * x` where `x` is row-major `cols × width` and `out` is
    /// row-major `rows × width`.
    pub(crate) fn mul_dense_into(&self, x: &[f64], width: usize, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols * width);
        debug_assert_eq!(out.len(), self.rows * width);
        out.fill(0.0);
        for r in 0..self.rows {
            let dst = &mut out[r * width..(r + 1) * width];
            for k in self.indptr[r]..self.indptr[r + 1] {
                let a = self.values[k];
                let src = &x[self.indices[k] as usize * width..][..width];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Undefined(format!("matrix invariant violated: {m}")));
        if self.indptr.len() != self.rows + 1 || self.indptr[self.rows] != self.nnz() {
            return bad("row pointer layout".into());
        }
        let mut col_sums = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            if row.indices.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {r} columns not strictly increasing"));
            }
            if row.values.iter().any(|&v| v == 0.0 || !v.is_finite()) {
                return bad(format!("row {r} stores a zero or non-finite value"));
            }
            if row.indices.iter().any(|&c| c as usize >= self.cols) {
                return bad(format!("row {r} has a column id out of range"));
            }
            if !close(row.sum(), self.row_sums[r]) {
                return bad(format!("row {r} sum mismatch"));
            }
            for (c, v) in row.iter() {
                col_sums[c as usize] += v;
            }
        }
        if let Some(c) = (0..self.cols).find(|&c| !close(col_sums[c], self.col_sums[c])) {
            return bad(format!("column {c} sum mismatch"));
        }
        Ok(())
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Counts co-occurrences of a pair stream over fixed vocabularies.
pub fn count_cooccurrences<'a, I>(pairs: I, targets: &Vocabulary, contexts: &Vocabulary) -> Result<SparseCoocMatrix>
where
    I: IntoIterator<Item = &'a PairRecord>,
{
    let ids = pairs
        .into_iter()
        .map(|p| Ok((targets.require(&p.target)?, contexts.require(&p.context)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseCoocMatrix::from_id_pairs(targets.len(), contexts.len(), &ids))
}

impl PairCorpus {
    pub fn cooccurrence_counts(&self) -> SparseCoocMatrix {
        SparseCoocMatrix::from_id_pairs(self.targets.len(), self.contexts.len(), &self.pairs)
    }
}

/// Smoothed, shifted positive PMI:
///
/// `max(ln(#(w,c) · Σ_c' #(c')^α / (#(w) · #(c)^α)) − ln k, 0)`
///
/// with `#(w)` the row sum and `#(c)` the column sum of `counts`. Cells that
/// end up at zero are dropped from storage.
pub fn ppmi_transform(counts: &SparseCoocMatrix, alpha: f64, k: f64) -> Result<SparseCoocMatrix> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::param(format!("k must be a finite value >= 1, got {k}")));
    }
    if counts.nnz() == 0 {
        return Err(Error::Empty("PPMI needs at least one nonzero count".into()));
    }

    let smoothed: Vec<f64> = counts.col_sums.iter().map(|&c| c.powf(alpha)).collect();
    let log_smoothed_total = smoothed.iter().sum::<f64>().ln();
    let log_k = k.ln();

    let mut indptr = vec![0usize; counts.rows + 1];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for r in 0..counts.rows {
        let log_row = counts.row_sums[r].ln();
        for (c, n) in counts.row(r).iter() {
            let pmi = n.ln() + log_smoothed_total - log_row - smoothed[c as usize].ln();
            let w = pmi - log_k;
            if w > 0.0 {
                indices.push(c);
                values.push(w);
            }
        }
        indptr[r + 1] = indices.len();
    }
    Ok(SparseCoocMatrix::from_sorted_parts(counts.rows, counts.cols, indptr, indices, values))
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".vocab");
    PathBuf::from(name)
}

/// Writes `<row_word>\t<col_word>\t<value>` triples (17 significant digits)
/// to `path` and both vocabularies to `<path>.vocab`.
pub fn write_matrix(path: &Path, matrix: &SparseCoocMatrix, targets: &Vocabulary, contexts: &Vocabulary) -> Result<()> {
    if targets.len() != matrix.rows() || contexts.len() != matrix.cols() {
        return Err(Error::param("vocabulary sizes do not match the matrix shape"));
    }
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for (r, c, v) in matrix.triplets() {
        let (tw, cw) = (targets.word(r).unwrap(), contexts.word(c).unwrap());
        writeln!(w, "{tw}\t{cw}\t{v:.16e}").map_err(io)?;
    }
    w.flush().map_err(io)?;

    let side = sidecar_path(path);
    let io = |e| Error::io(&side, e);
    let mut w = BufWriter::new(File::create(&side).map_err(io)?);
    for (tag, vocab) in [("t", targets), ("c", contexts)] {
        for (word, count) in vocab.words().iter().zip(vocab.counts()) {
            writeln!(w, "{tag}\t{word}\t{count}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<(SparseCoocMatrix, Vocabulary, Vocabulary)> {
    let side = sidecar_path(path);
    let parse_err = |p: &Path, line: usize, message: String| Error::Parse {
        path: p.to_path_buf(),
        line,
        message,
    };

    let mut targets = Vec::new();
    let mut contexts = Vec::new();
    let reader = BufReader::new(File::open(&side).map_err(|e| Error::io(&side, e))?);
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&side, e))?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [tag, word, count] = fields[..] else {
            return Err(parse_err(&side, i + 1, "expected `<t|c>\\t<word>\\t<count>`".into()));
        };
        let count: u64 = count.parse().map_err(|e| parse_err(&side, i + 1, format!("bad count: {e}")))?;
        match tag {
            "t" => targets.push((word.to_string(), count)),
            "c" => contexts.push((word.to_string(), count)),
            _ => return Err(parse_err(&side, i + 1, format!("unknown role tag `{tag}`"))),
        }
    }
    let targets = Vocabulary::from_counts(targets)?;
    let contexts = Vocabulary::from_counts(contexts)?;

    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut triplets = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [tw, cw, v] = fields[..] else {
            return Err(parse_err(path, i + 1, "expected 3 tab-separated fields".into()));
        };
        let v: f64 = v.parse().map_err(|e| parse_err(path, i + 1, format!("bad value: {e}")))?;
        triplets.push((targets.require(tw)?, contexts.require(cw)?, v));
    }
    let matrix = SparseCoocMatrix::from_triplets(targets.len(), contexts.len(), triplets)?;
    Ok((matrix, targets, contexts))
}
