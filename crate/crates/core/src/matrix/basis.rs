use super::{gram_dense, mul_par, symmetric_eigen_sorted, Dense};
use crate::error::{Error, Result};

/// Relative singular-value cutoff used for numerical rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;

const ORTHO_TOL: f64 = 1e-10;

/// A d x m matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    columns: Dense,
}

impl OrthonormalBasis {
    /// Validates orthonormality (max-abs deviation of Q^T Q from identity
    /// within 1e-10).
    pub fn new(columns: Dense) -> Result<Self> {
        let g = gram_dense(&columns);
        let m = columns.ncols();
        for j in 0..m {
            for i in 0..m {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (g[(i, j)] - expect).abs() > ORTHO_TOL {
                    return Err(Error::InvalidParams(format!(
                        "columns not orthonormal: |Q^T Q - I| = {:.3e} at ({i}, {j})",
                        (g[(i, j)] - expect).abs()
                    )));
                }
            }
        }
        Ok(OrthonormalBasis { columns })
    }

    /// Rank-0 basis of the given ambient dimension.
    pub fn empty(ambient_dim: usize) -> Self {
        OrthonormalBasis {
            columns: Dense::zeros(ambient_dim, 0),
        }
    }

    pub fn identity(dim: usize) -> Self {
        OrthonormalBasis {
            columns: Dense::identity(dim, dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn rank(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &Dense {
        &self.columns
    }

    pub fn into_columns(self) -> Dense {
        self.columns
    }

    /// Truncate to the first m columns.
    pub fn truncate(&self, m: usize) -> Self {
        let keep = m.min(self.rank());
        OrthonormalBasis {
            columns: self.columns.columns(0, keep).into_owned(),
        }
    }

    /// An orthonormal basis of the orthogonal complement of the span.
    pub fn complement(&self) -> Self {
        let d = self.ambient_dim();
        let m = self.rank();
        if m == 0 {
            return Self::identity(d);
        }
        if m >= d {
            return Self::empty(d);
        }
        // I - QQ^T applied to the identity, then re-orthonormalized.
        let mut resid = Dense::identity(d, d);
        let qt = self.columns.transpose();
        let coeff = &qt * &resid;
        resid -= &self.columns * coeff;
        let full = orthonormalize(&resid);
        full.truncate(d - m)
    }
}

/// Orthonormal basis of the column span of M. Singular directions with
/// singular value <= 1e-10 * sigma_max are dropped; an all-zero input yields
/// a rank-0 basis.
pub fn orthonormalize(m: &Dense) -> OrthonormalBasis {
    let (d, r) = (m.nrows(), m.ncols());
    if r == 0 || m.iter().all(|v| *v == 0.0) {
        return OrthonormalBasis::empty(d);
    }
    if d <= r {
        // Eigenvectors of M M^T with retained eigenvalues are the left
        // singular vectors; they are orthonormal by construction.
        let t = m.transpose();
        let g = gram_dense(&t);
        let (vals, vecs) = symmetric_eigen_sorted(g);
        let kept = kept_rank(&vals);
        OrthonormalBasis {
            columns: vecs.columns(0, kept).into_owned(),
        }
    } else {
        // Right factors from the small Gram, then a thin QR of M V to
        // restore orthonormality lost to the squared conditioning.
        let g = gram_dense(m);
        let (vals, vecs) = symmetric_eigen_sorted(g);
        let kept = kept_rank(&vals);
        if kept == 0 {
            return OrthonormalBasis::empty(d);
        }
        let v = vecs.columns(0, kept).into_owned();
        let q0 = mul_par(m, &v);
        let qr = q0.qr();
        let q = qr.q();
        OrthonormalBasis {
            columns: q.columns(0, kept).into_owned(),
        }
    }
}

fn kept_rank(eigvals_desc: &[f64]) -> usize {
    let max = eigvals_desc.first().copied().unwrap_or(0.0).max(0.0);
    if max <= 0.0 {
        return 0;
    }
    let cut = RANK_CUTOFF * RANK_CUTOFF * max;
    eigvals_desc.iter().take_while(|&&v| v > cut).count()
}
