//! Truncated SVD of sparse matrices by randomized range finding, and the
//! eigenvalue-weighted embeddings `U_d · diag(S_d)^p` built from it.
//!
//! The range finder follows the usual Gaussian-sketch scheme: sample
//! `Y = A Ω` with `d + oversample` columns, run `power_iters` rounds of
//! subspace iteration with QR re-orthonormalization after every product, then
//! solve the small projected problem exactly. All randomness comes from the
//! seeded generator and the dense kernels run sequentially, so a fixed seed
//! gives a bit-identical factorization.

use faer::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::cooc::SparseCoocMatrix;
use crate::embedding::{DenseEmbedding, DenseMatrix};
use crate::error::{Error, Result};
use crate::pairs::Vocabulary;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdParams {
    pub rank: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl SvdParams {
    pub fn new(rank: usize) -> Self {
        SvdParams {
            rank,
            oversample: 10,
            power_iters: 7,
            seed: 0,
        }
    }
}

impl Default for SvdParams {
    fn default() -> Self {
        SvdParams::new(300)
    }
}

/// `M ≈ U · diag(S) · Vᵀ` with orthonormal columns in `U` and `V` and
/// non-increasing `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedFactorization {
    pub u: DenseMatrix,
    pub s: Vec<f64>,
    pub v: DenseMatrix,
}

impl TruncatedFactorization {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    /// `U · diag(S)^p`, with `0^0` taken as 1.
    pub fn weighted_u(&self, p: f64) -> Result<DenseMatrix> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("eigenvalue weight p must lie in [0, 1], got {p}")));
        }
        let weights: Vec<f64> = self
            .s
            .iter()
            .map(|&s| if p == 0.0 { 1.0 } else { s.powf(p) })
            .collect();
        Ok(DenseMatrix::from_fn(self.u.rows(), self.u.cols(), |r, c| {
            self.u.get(r, c) * weights[c]
        }))
    }

    /// Dense `U · diag(S) · Vᵀ`, for small matrices.
    pub fn reconstruct(&self) -> DenseMatrix {
        let d = self.rank();
        DenseMatrix::from_fn(self.u.rows(), self.v.rows(), |r, c| {
            (0..d).map(|k| self.u.get(r, k) * self.s[k] * self.v.get(c, k)).sum()
        })
    }
}

/// Embedding rows for the targets of `vocab`: `U_d · diag(S_d)^p`.
pub fn embed_svd(f: &TruncatedFactorization, p: f64, vocab: &Vocabulary) -> Result<DenseEmbedding> {
    DenseEmbedding::new(vocab.clone(), f.weighted_u(p)?)
}

fn to_faer(rows: usize, cols: usize, row_major: &[f64]) -> Mat<f64> {
    Mat::from_fn(rows, cols, |i, j| row_major[i * cols + j])
}

fn to_row_major(m: &Mat<f64>, keep_cols: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * keep_cols);
    for i in 0..m.nrows() {
        for j in 0..keep_cols {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// Orthonormal basis (thin Householder Q) for the columns of a row-major
/// `rows × cols` buffer, returned row-major.
fn orthonormalize(rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    let q = to_faer(rows, cols, y).qr().compute_thin_Q();
    to_row_major(&q, cols)
}

pub fn truncated_svd(m: &SparseCoocMatrix, params: &SvdParams) -> Result<TruncatedFactorization> {
    let (rows, cols) = (m.rows(), m.cols());
    let d = params.rank;
    if d == 0 || d > rows.min(cols) {
        return Err(Error::param(format!(
            "rank {d} must lie in [1, {}] for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    if m.nnz() == 0 {
        return Err(Error::Empty("cannot factorize an all-zero matrix".into()));
    }

    let width = (d + params.oversample).min(rows.min(cols));
    let mt = m.transpose();
    let mut rng = rng::seeded(params.seed);
    let omega: Vec<f64> = (0..cols * width).map(|_| StandardNormal.sample(&mut rng)).collect();

    let mut y = vec![0.0; rows * width];
    let mut z = vec![0.0; cols * width];
    m.mul_dense_into(&omega, width, &mut y);
    let mut q = orthonormalize(rows, width, &y);
    for _ in 0..params.power_iters {
        mt.mul_dense_into(&q, width, &mut z);
        let qz = orthonormalize(cols, width, &z);
        m.mul_dense_into(&qz, width, &mut y);
        q = orthonormalize(rows, width, &y);
    }
    drop(y);

    // Bᵀ = Aᵀ Q = Q_c R, and R = P Σ Tᵀ gives A ≈ (Q T) Σ (Q_c P)ᵀ.
    mt.mul_dense_into(&q, width, &mut z);
    let qr = to_faer(cols, width, &z).qr();
    drop(z);
    let qc = qr.compute_thin_Q();
    let svd = qr
        .thin_R()
        .thin_svd()
        .map_err(|e| Error::Undefined(format!("small SVD did not converge: {e:?}")))?;

    let u = to_faer(rows, width, &q) * svd.V();
    let v = qc * svd.U();
    let sv = svd.S().column_vector();
    let s: Vec<f64> = (0..d).map(|k| sv[k].max(0.0)).collect();

    Ok(TruncatedFactorization {
        u: DenseMatrix::from_vec(rows, d, to_row_major(&u, d))?,
        s,
        v: DenseMatrix::from_vec(cols, d, to_row_major(&v, d))?,
    })
}
