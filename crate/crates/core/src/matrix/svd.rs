use super::{DataMatrix, Dense, RANK_CUTOFF};
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense factorization path.
pub const SVD_SIZE_LIMIT: usize = 4000;

/// Below this size the bidiagonalization SVD is used directly; above it the
/// factors come from a symmetric eigensolve of the smaller Gram matrix.
const DIRECT_SVD_LIMIT: usize = 512;

/// A = U diag(sigma) V^T with column-orthonormal U, V and nonincreasing
/// singular values. Numerical rank directions below 1e-10 * sigma_max are
/// dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactorization {
    pub left_vectors: Dense,
    pub singular_values: Vec<f64>,
    pub right_vectors: Dense,
}

impl SvdFactorization {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

/// Full SVD with a deterministic sign convention: each right singular
/// vector's largest-magnitude entry is nonnegative (ties resolved at the
/// lowest index).
pub fn full_svd(a: &DataMatrix) -> Result<SvdFactorization> {
    let (n, d) = (a.rows(), a.cols());
    let small = n.min(d);
    if small > SVD_SIZE_LIMIT {
        return Err(Error::TooLarge {
            dim: small,
            limit: SVD_SIZE_LIMIT,
        });
    }
    if small <= DIRECT_SVD_LIMIT {
        return direct_svd(a);
    }
    // Gram route on the smaller side; only desk-scale callers reach this.
    let (v, sigma_sq) = right_factors(a)?;
    let sigma: Vec<f64> = sigma_sq.iter().map(|s| s.sqrt()).collect();
    let av = a.multiply(&v)?;
    let mut u = av;
    for (i, s) in sigma.iter().enumerate() {
        if *s > 0.0 {
            let mut col = u.column_mut(i);
            col /= *s;
        }
    }
    // Householder pass to restore orthonormality of the recovered side,
    // keeping the sign pairing with V intact.
    let (q, r) = u.qr().unpack();
    let mut u = q.columns(0, sigma.len()).into_owned();
    for i in 0..sigma.len() {
        if r[(i, i)] < 0.0 {
            let mut col = u.column_mut(i);
            col.neg_mut();
        }
    }
    Ok(SvdFactorization {
        left_vectors: u,
        singular_values: sigma,
        right_vectors: v,
    })
}

fn direct_svd(a: &DataMatrix) -> Result<SvdFactorization> {
    let dense = a.to_dense();
    let svd = dense.svd(true, true);
    let u_raw = svd.u.expect("svd with u requested");
    let vt_raw = svd.v_t.expect("svd with v_t requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap().then(i.cmp(&j)));
    let sigma_max = order.first().map(|&i| sv[i]).unwrap_or(0.0);
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| sv[i] > RANK_CUTOFF * sigma_max && sv[i] > 0.0)
        .collect();

    let (n, d) = (a.rows(), a.cols());
    let rho = kept.len();
    let mut u = Dense::zeros(n, rho);
    let mut v = Dense::zeros(d, rho);
    let mut sigma = Vec::with_capacity(rho);
    for (out, &src) in kept.iter().enumerate() {
        sigma.push(sv[src]);
        u.set_column(out, &u_raw.column(src));
        v.set_column(out, &vt_raw.row(src).transpose());
    }
    apply_sign_convention(&mut v, Some(&mut u));
    Ok(SvdFactorization {
        left_vectors: u,
        singular_values: sigma,
        right_vectors: v,
    })
}

/// Right singular vectors and squared singular values, without forming U.
/// Used by the exact-SVD coreset baseline, where the left factors are never
/// needed and n may be large.
pub fn right_factors(a: &DataMatrix) -> Result<(Dense, Vec<f64>)> {
    let (n, d) = (a.rows(), a.cols());
    if n.max(d) <= DIRECT_SVD_LIMIT {
        let f = direct_svd(a)?;
        let sq = f.singular_values.iter().map(|s| s * s).collect();
        return Ok((f.right_vectors, sq));
    }
    if d <= n {
        if d > SVD_SIZE_LIMIT {
            return Err(Error::TooLarge {
                dim: d,
                limit: SVD_SIZE_LIMIT,
            });
        }
        let g = a.gram();
        let (vals, vecs) = symmetric_eigen_sorted(g);
        let kept = kept_count(&vals);
        let mut v = vecs.columns(0, kept).into_owned();
        apply_sign_convention(&mut v, None);
        Ok((v, vals[..kept].to_vec()))
    } else {
        if n > SVD_SIZE_LIMIT {
            return Err(Error::TooLarge {
                dim: n,
                limit: SVD_SIZE_LIMIT,
            });
        }
        let g = a.outer_gram();
        let (vals, vecs) = symmetric_eigen_sorted(g);
        let kept = kept_count(&vals);
        let u = vecs.columns(0, kept).into_owned();
        // v_i = A^T u_i / sigma_i, then a thin QR cleanup.
        let at = DataMatrix::from_dense(a.to_dense().transpose())?;
        let mut v0 = at.multiply(&u)?;
        for i in 0..kept {
            let s = vals[i].max(0.0).sqrt();
            if s > 0.0 {
                let mut col = v0.column_mut(i);
                col /= s;
            }
        }
        let q = v0.qr().q();
        let mut v = q.columns(0, kept).into_owned();
        apply_sign_convention(&mut v, None);
        Ok((v, vals[..kept].to_vec()))
    }
}

/// Sum of squared singular values beyond index m: the squared Frobenius
/// distance to the best rank-m approximation.
pub fn best_rank_m_residual(svd: &SvdFactorization, m: usize) -> f64 {
    svd.singular_values.iter().skip(m).map(|s| s * s).sum()
}

fn kept_count(eigvals_desc: &[f64]) -> usize {
    let max = eigvals_desc.first().copied().unwrap_or(0.0).max(0.0);
    if max <= 0.0 {
        return 0;
    }
    let cut = RANK_CUTOFF * RANK_CUTOFF * max;
    eigvals_desc.iter().take_while(|&&v| v > cut).count()
}

/// Symmetric eigendecomposition sorted by eigenvalue, descending. Negative
/// round-off eigenvalues are clamped to zero.
pub(crate) fn symmetric_eigen_sorted(g: Dense) -> (Vec<f64>, Dense) {
    let dim = g.nrows();
    let se = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut vals = Vec::with_capacity(dim);
    let mut vecs = Dense::zeros(dim, dim);
    for (out, &src) in order.iter().enumerate() {
        vals.push(se.eigenvalues[src].max(0.0));
        vecs.set_column(out, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Fix each column's sign so its largest-magnitude entry is nonnegative
/// (ties resolved at the lowest index). When `paired` is given its matching
/// column is flipped alongside.
pub(crate) fn apply_sign_convention(v: &mut Dense, mut paired: Option<&mut Dense>) {
    for j in 0..v.ncols() {
        let col = v.column(j);
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            let mut c = v.column_mut(j);
            c.neg_mut();
            if let Some(p) = paired.as_deref_mut() {
                let mut pc = p.column_mut(j);
                pc.neg_mut();
            }
        }
    }
}

