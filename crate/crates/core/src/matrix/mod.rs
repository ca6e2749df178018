//! Dense and sparse matrix storage plus the norm / product / projection
//! primitives the sketching and coreset layers are built from.
//!
//! Dense matrices are column-major `nalgebra::DMatrix<f64>`; sparse matrices
//! are row-compressed so products touch only stored nonzeros.

mod basis;
mod random;
mod svd;

pub use basis::{orthonormalize, OrthonormalBasis, RANK_CUTOFF};
pub use random::{random_dense, random_sparse};
pub use svd::{best_rank_m_residual, full_svd, right_factors, SvdFactorization};
pub(crate) use svd::symmetric_eigen_sorted;

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;

pub type Dense = DMatrix<f64>;

/// Row-compressed sparse storage. Column indices are strictly increasing
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrData {
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(Dense),
    Sparse(CsrData),
}

/// The input matrix A, dense or row-compressed sparse, with nnz tracking.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    nnz: usize,
    storage: Storage,
}

impl DataMatrix {
    pub fn from_dense(m: Dense) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::InvalidParams("matrix must be non-empty".into()));
        }
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if !m[(r, c)].is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        let nnz = m.iter().filter(|v| v.abs() > 0.0).count();
        Ok(DataMatrix {
            rows: m.nrows(),
            cols: m.ncols(),
            nnz,
            storage: Storage::Dense(m),
        })
    }

    /// Convenience constructor from row-major nested slices (tests, small inputs).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidParams("matrix must be non-empty".into()));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidParams("ragged rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_dense(Dense::from_row_slice(rows.len(), d, &flat))
    }

    pub fn from_csr(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParams("matrix must be non-empty".into()));
        }
        if row_offsets.len() != rows + 1 || row_offsets[0] != 0 {
            return Err(Error::InvalidParams("bad row offsets".into()));
        }
        let nnz = *row_offsets.last().unwrap();
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::InvalidParams(
                "index/value length does not match offsets".into(),
            ));
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if hi < lo {
                return Err(Error::InvalidParams(format!(
                    "row offsets decrease at row {i}"
                )));
            }
            let mut prev = None;
            for t in lo..hi {
                let c = col_indices[t];
                if c >= cols {
                    return Err(Error::InvalidParams(format!(
                        "column index {c} out of range in row {i}"
                    )));
                }
                if prev.is_some_and(|p| c <= p) {
                    return Err(Error::InvalidParams(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
                prev = Some(c);
                if !values[t].is_finite() {
                    return Err(Error::NonFinite { row: i, col: c });
                }
            }
        }
        Ok(DataMatrix {
            rows,
            cols,
            nnz,
            storage: Storage::Sparse(CsrData {
                row_offsets,
                col_indices,
                values,
            }),
        })
    }

    /// Build sparse storage from (row, col, value) triplets. Duplicates are rejected.
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<&(usize, usize, f64)> = entries.iter().collect();
        sorted.sort_by_key(|(r, c, _)| (*r, *c));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut prev: Option<(usize, usize)> = None;
        for &&(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::InvalidParams(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if prev == Some((r, c)) {
                return Err(Error::InvalidParams(format!("duplicate entry ({r}, {c})")));
            }
            prev = Some((r, c));
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::from_csr(rows, cols, row_offsets, col_indices, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn to_dense(&self) -> Dense {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => {
                let mut m = Dense::zeros(self.rows, self.cols);
                for i in 0..self.rows {
                    for t in s.row_offsets[i]..s.row_offsets[i + 1] {
                        m[(i, s.col_indices[t])] = s.values[t];
                    }
                }
                m
            }
        }
    }

    /// Sum of squared entries. Equals the sum of squared singular values.
    pub fn frobenius_norm_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|v| v * v).sum(),
            Storage::Sparse(s) => s.values.iter().map(|v| v * v).sum(),
        }
    }

    /// A * B for dense B. The sparse path touches only stored nonzeros.
    pub fn multiply(&self, b: &Dense) -> Result<Dense> {
        if self.cols != b.nrows() {
            return Err(Error::dim("multiply", self.cols, b.nrows()));
        }
        let out_cols = b.ncols();
        match &self.storage {
            Storage::Dense(m) => Ok(mul_par(m, b)),
            Storage::Sparse(s) => {
                let mut out = Dense::zeros(self.rows, out_cols);
                // out[i, j] = sum over stored (i, c, v) of v * b[c, j]
                let rows = self.rows;
                let out_data = out.as_mut_slice();
                out_data
                    .par_chunks_mut(rows)
                    .enumerate()
                    .for_each(|(j, col)| {
                        for i in 0..rows {
                            let mut acc = 0.0;
                            for t in s.row_offsets[i]..s.row_offsets[i + 1] {
                                acc += s.values[t] * b[(s.col_indices[t], j)];
                            }
                            col[i] = acc;
                        }
                    });
                Ok(out)
            }
        }
    }

    /// A^T A, exploiting sparsity when available.
    pub(crate) fn gram(&self) -> Dense {
        match &self.storage {
            Storage::Dense(m) => gram_dense(m),
            Storage::Sparse(s) => {
                let mut g = Dense::zeros(self.cols, self.cols);
                for i in 0..self.rows {
                    let (lo, hi) = (s.row_offsets[i], s.row_offsets[i + 1]);
                    for a in lo..hi {
                        let (ca, va) = (s.col_indices[a], s.values[a]);
                        for b in lo..hi {
                            g[(s.col_indices[b], ca)] += va * s.values[b];
                        }
                    }
                }
                g
            }
        }
    }

    /// A A^T, exploiting sparsity when available.
    pub(crate) fn outer_gram(&self) -> Dense {
        match &self.storage {
            Storage::Dense(m) => {
                let t = m.transpose();
                gram_dense(&t)
            }
            Storage::Sparse(s) => {
                let mut g = Dense::zeros(self.rows, self.rows);
                for i in 0..self.rows {
                    for k in 0..=i {
                        let mut acc = 0.0;
                        let (mut a, hi_a) = (s.row_offsets[i], s.row_offsets[i + 1]);
                        let (mut b, hi_b) = (s.row_offsets[k], s.row_offsets[k + 1]);
                        while a < hi_a && b < hi_b {
                            match s.col_indices[a].cmp(&s.col_indices[b]) {
                                std::cmp::Ordering::Less => a += 1,
                                std::cmp::Ordering::Greater => b += 1,
                                std::cmp::Ordering::Equal => {
                                    acc += s.values[a] * s.values[b];
                                    a += 1;
                                    b += 1;
                                }
                            }
                        }
                        g[(i, k)] = acc;
                        g[(k, i)] = acc;
                    }
                }
                g
            }
        }
    }
}

/// Project the rows of A onto a basis: returns the thin representation A * B.
pub fn project_rows(a: &DataMatrix, b: &OrthonormalBasis) -> Result<Dense> {
    if b.ambient_dim() != a.cols() {
        return Err(Error::dim("project_rows", a.cols(), b.ambient_dim()));
    }
    a.multiply(b.columns())
}

/// Row-parallel dense product. Deterministic: each output column is computed
/// independently with a fixed accumulation order.
pub(crate) fn mul_par(a: &Dense, b: &Dense) -> Dense {
    assert_eq!(a.ncols(), b.nrows());
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = Dense::zeros(n, m);
    let a_data = a.as_slice();
    out.as_mut_slice()
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(j, col)| {
            for t in 0..k {
                let w = b[(t, j)];
                if w == 0.0 {
                    continue;
                }
                let a_col = &a_data[t * n..(t + 1) * n];
                for i in 0..n {
                    col[i] += w * a_col[i];
                }
            }
        });
    out
}

/// M^T M via contiguous column dot products.
pub(crate) fn gram_dense(m: &Dense) -> Dense {
    let (rows, cols) = (m.nrows(), m.ncols());
    let data = m.as_slice();
    let mut g = Dense::zeros(cols, cols);
    g.as_mut_slice()
        .par_chunks_mut(cols)
        .enumerate()
        .for_each(|(j, out_col)| {
            let cj = &data[j * rows..(j + 1) * rows];
            for (i, out) in out_col.iter_mut().enumerate() {
                let ci = &data[i * rows..(i + 1) * rows];
                let mut acc = 0.0;
                for t in 0..rows {
                    acc += ci[t] * cj[t];
                }
                *out = acc;
            }
        });
    g
}

#[cfg(test)]
mod tests;
