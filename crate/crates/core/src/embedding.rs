//! Dense row-major matrices and word embeddings in the plain text format:
//! a `<rows> <dim>` header followed by `<word> <v1> ... <vd>` per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pairs::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::param(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }
}

/// Shortest round-trip text, switching to exponent form for very small or
/// large magnitudes.
pub(crate) fn shortest(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
}

/// One vector per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEmbedding {
    vocab: Vocabulary,
    matrix: DenseMatrix,
}

impl DenseEmbedding {
    pub fn new(vocab: Vocabulary, matrix: DenseMatrix) -> Result<Self> {
        if vocab.len() != matrix.rows() {
            return Err(Error::param(format!(
                "vocabulary has {} words but the matrix has {} rows",
                vocab.len(),
                matrix.rows()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::param("embedding contains non-finite values"));
        }
        Ok(DenseEmbedding { vocab, matrix })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.id(word).map(|id| self.matrix.row(id as usize))
    }

    pub fn into_parts(self) -> (Vocabulary, DenseMatrix) {
        (self.vocab, self.matrix)
    }

    /// Values are written in shortest round-trip form.
    pub fn write(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "{} {}", self.matrix.rows(), self.matrix.cols()).map_err(io)?;
        for (id, word) in self.vocab.words().iter().enumerate() {
            w.write_all(word.as_bytes()).map_err(io)?;
            for v in self.matrix.row(id) {
                write!(w, " {}", shortest(*v)).map_err(io)?;
            }
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?).lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `<rows> <dim>` header".into()))?
            .map_err(|e| Error::io(path, e))?;
        let dims: Vec<usize> = header
            .split(' ')
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(1, format!("bad header: {e}")))?;
        let [rows, dim] = dims[..] else {
            return Err(parse_err(1, "header must be `<rows> <dim>`".into()));
        };

        let mut words = Vec::with_capacity(rows);
        let mut data = Vec::with_capacity(rows * dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            let mut fields = line.split(' ');
            let word = fields.next().unwrap_or_default();
            let before = data.len();
            for f in fields {
                data.push(f.parse::<f64>().map_err(|e| parse_err(line_no, format!("bad value: {e}")))?);
            }
            if data.len() - before != dim {
                return Err(parse_err(line_no, format!("expected {dim} values")));
            }
            words.push((word.to_string(), 0));
        }
        if words.len() != rows {
            return Err(parse_err(rows + 1, format!("expected {rows} rows, found {}", words.len())));
        }
        DenseEmbedding::new(Vocabulary::from_counts(words)?, DenseMatrix::from_vec(rows, dim, data)?)
    }
}
