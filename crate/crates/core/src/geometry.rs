//! Closed sets (unions of k linear or affine j-subspaces), exact distance
//! evaluation, and seeded random instance generation. This module is the
//! brute-force oracle the coreset guarantees are checked against.

use crate::error::{Error, Result};
use crate::matrix::{orthonormalize, DataMatrix, Dense, OrthonormalBasis};
use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A j-dimensional linear subspace of R^d, or an affine one when an offset
/// is present.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: OrthonormalBasis,
    offset: Option<DVector<f64>>,
}

impl Subspace {
    pub fn linear(basis: OrthonormalBasis) -> Self {
        Subspace {
            basis,
            offset: None,
        }
    }

    pub fn affine(basis: OrthonormalBasis, offset: DVector<f64>) -> Result<Self> {
        if offset.len() != basis.ambient_dim() {
            return Err(Error::dim("affine offset", basis.ambient_dim(), offset.len()));
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("offset must be finite".into()));
        }
        Ok(Subspace {
            basis,
            offset: Some(offset),
        })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn offset(&self) -> Option<&DVector<f64>> {
        self.offset.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.rank()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ambient_dim()
    }
}

/// The union of k subspaces sharing an ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSet {
    pub subspaces: Vec<Subspace>,
    pub ambient_dim: usize,
}

impl ClosedSet {
    pub fn new(subspaces: Vec<Subspace>) -> Result<Self> {
        let first = subspaces
            .first()
            .ok_or_else(|| Error::InvalidParams("closed set needs at least one subspace".into()))?;
        let d = first.ambient_dim();
        if subspaces.iter().any(|s| s.ambient_dim() != d) {
            return Err(Error::InvalidParams(
                "subspaces must share the ambient dimension".into(),
            ));
        }
        Ok(ClosedSet {
            subspaces,
            ambient_dim: d,
        })
    }

    pub fn k(&self) -> usize {
        self.subspaces.len()
    }

    pub fn max_dim(&self) -> usize {
        self.subspaces.iter().map(|s| s.dim()).max().unwrap_or(0)
    }

    pub fn is_affine(&self) -> bool {
        self.subspaces.iter().any(|s| s.offset.is_some())
    }

    /// Squared distances evaluated in sketch coordinates: rows of
    /// `projected` are the coefficients of A* in the orthonormal basis
    /// `reducer` (d x m). Numerically identical to reconstructing the rows.
    pub(crate) fn dist2_in_coordinates(&self, projected: &Dense, reducer: &Dense) -> f64 {
        let m = reducer.ncols();
        // Precompute per subspace: G = X^T reducer (j x m), plus affine terms.
        struct Prepared {
            g: Dense,
            t: Option<(DVector<f64>, DVector<f64>, f64)>, // (R^T o, X^T o, |o|^2)
        }
        let prepared: Vec<Prepared> = self
            .subspaces
            .iter()
            .map(|s| {
                let g = s.basis.columns().transpose() * reducer;
                let t = s.offset.as_ref().map(|o| {
                    let ro = reducer.transpose() * o;
                    let xo = s.basis.columns().transpose() * o;
                    (ro, xo, o.norm_squared())
                });
                Prepared { g, t }
            })
            .collect();

        let mut total = 0.0;
        let mut y = DVector::<f64>::zeros(m);
        for i in 0..projected.nrows() {
            for c in 0..m {
                y[c] = projected[(i, c)];
            }
            let mut best = f64::INFINITY;
            for p in &prepared {
                let d2 = match &p.t {
                    None => {
                        let gy = &p.g * &y;
                        y.norm_squared() - gy.norm_squared()
                    }
                    Some((ro, xo, o_sq)) => {
                        let shifted_sq = y.norm_squared() - 2.0 * y.dot(ro) + o_sq;
                        let gy = &p.g * &y - xo;
                        shifted_sq - gy.norm_squared()
                    }
                };
                best = best.min(d2.max(0.0));
            }
            total += best;
        }
        total
    }
}

/// Squared distance from a point to a subspace via the Pythagorean short
/// form: |p|^2 - |X^T p|^2, applied to p - offset in the affine case.
pub fn dist2_point_to_subspace(p: &DVector<f64>, l: &Subspace) -> f64 {
    let d2 = match &l.offset {
        None => {
            let proj = l.basis.columns().transpose() * p;
            p.norm_squared() - proj.norm_squared()
        }
        Some(o) => {
            let shifted = p - o;
            let proj = l.basis.columns().transpose() * &shifted;
            shifted.norm_squared() - proj.norm_squared()
        }
    };
    d2.max(0.0)
}

/// Minimum over the member subspaces.
pub fn dist2_point_to_closedset(p: &DVector<f64>, c: &ClosedSet) -> f64 {
    c.subspaces
        .iter()
        .map(|l| dist2_point_to_subspace(p, l))
        .fold(f64::INFINITY, f64::min)
}

/// Row-wise sum of squared distances from A to the closed set.
pub fn dist2_matrix_to_closedset(a: &DataMatrix, c: &ClosedSet) -> Result<f64> {
    if a.cols() != c.ambient_dim {
        return Err(Error::dim("dist2_matrix", a.cols(), c.ambient_dim));
    }
    let dense = a.to_dense();
    let mut total = 0.0;
    let mut p = DVector::<f64>::zeros(a.cols());
    for i in 0..a.rows() {
        for col in 0..a.cols() {
            p[col] = dense[(i, col)];
        }
        total += dist2_point_to_closedset(&p, c);
    }
    Ok(total)
}

/// k independent random subspaces, each the orthonormalization of a d x j
/// standard Gaussian draw; affine offsets are Gaussian scaled by
/// `offset_scale`. Reproducible from the seed.
pub fn random_closed_set(
    d: usize,
    k: usize,
    j: usize,
    affine: bool,
    offset_scale: f64,
    seed: u64,
) -> ClosedSet {
    assert!(j <= d && k >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subspaces = Vec::with_capacity(k);
    for _ in 0..k {
        let mut m = Dense::zeros(d, j);
        for c in 0..j {
            for r in 0..d {
                m[(r, c)] = rng.sample(StandardNormal);
            }
        }
        let basis = orthonormalize(&m);
        let sub = if affine {
            let mut o = DVector::<f64>::zeros(d);
            for r in 0..d {
                let g: f64 = rng.sample(StandardNormal);
                o[r] = offset_scale * g;
            }
            Subspace::affine(basis, o).expect("finite offset")
        } else {
            Subspace::linear(basis)
        };
        subspaces.push(sub);
    }
    ClosedSet::new(subspaces).expect("non-empty by construction")
}

/// Both sides of the weak triangle inequality, with the verdict.
#[derive(Debug, Clone, Copy)]
pub struct WeakTriangle {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// |dist^2(p, C) - dist^2(q, C)| <= 12 |p - q|^2 / eps + (eps / 2) dist^2(p, C).
pub fn check_weak_triangle(
    p: &DVector<f64>,
    q: &DVector<f64>,
    c: &ClosedSet,
    eps: f64,
) -> WeakTriangle {
    let dp = dist2_point_to_closedset(p, c);
    let dq = dist2_point_to_closedset(q, c);
    let lhs = (dp - dq).abs();
    let rhs = 12.0 * (p - q).norm_squared() / eps + 0.5 * eps * dp;
    WeakTriangle {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * (1.0 + rhs),
    }
}

// --- text interchange format -------------------------------------------------

/// Render a closed set in the line-oriented text format: a header, then one
/// block per subspace (dimension line, optional offset line, one line per
/// basis vector).
pub fn closedset_to_text(c: &ClosedSet) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "closedset v1 d={} k={}\n",
        c.ambient_dim,
        c.subspaces.len()
    ));
    for s in &c.subspaces {
        out.push_str(&format!(
            "subspace j={} affine={}\n",
            s.dim(),
            if s.offset.is_some() { 1 } else { 0 }
        ));
        if let Some(o) = &s.offset {
            out.push_str("offset");
            for v in o.iter() {
                out.push_str(&format!(" {v:.17e}"));
            }
            out.push('\n');
        }
        for col in 0..s.dim() {
            out.push_str("basis");
            for r in 0..s.ambient_dim() {
                out.push_str(&format!(" {:.17e}", s.basis.columns()[(r, col)]));
            }
            out.push('\n');
        }
    }
    out
}

pub fn closedset_from_text(text: &str) -> Result<ClosedSet> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, why: &str| Error::Format {
        offset: line + 1,
        reason: format!("closed-set text, line {}: {why}", line + 1),
    };
    let (hline, header) = lines
        .next()
        .ok_or_else(|| bad(0, "empty input"))?;
    let mut d = None;
    let mut k = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("d=") {
            d = v.parse::<usize>().ok();
        }
        if let Some(v) = tok.strip_prefix("k=") {
            k = v.parse::<usize>().ok();
        }
    }
    if !header.starts_with("closedset v1") {
        return Err(bad(hline, "expected 'closedset v1' header"));
    }
    let d = d.ok_or_else(|| bad(hline, "missing d="))?;
    let k = k.ok_or_else(|| bad(hline, "missing k="))?;

    let mut subspaces = Vec::with_capacity(k);
    let mut pending: Vec<(usize, String)> = lines.map(|(i, l)| (i, l.to_string())).collect();
    pending.reverse();
    for _ in 0..k {
        let (ln, line) = pending
            .pop()
            .ok_or_else(|| bad(usize::MAX - 1, "missing subspace block"))?;
        if !line.starts_with("subspace") {
            return Err(bad(ln, "expected 'subspace' line"));
        }
        let mut j = None;
        let mut affine = false;
        for tok in line.split_whitespace() {
            if let Some(v) = tok.strip_prefix("j=") {
                j = v.parse::<usize>().ok();
            }
            if let Some(v) = tok.strip_prefix("affine=") {
                affine = v == "1";
            }
        }
        let j = j.ok_or_else(|| bad(ln, "missing j="))?;
        let mut offset = None;
        if affine {
            let (oln, oline) = pending.pop().ok_or_else(|| bad(ln, "missing offset"))?;
            let vals = parse_floats(oline.strip_prefix("offset").ok_or_else(|| {
                bad(oln, "expected 'offset' line")
            })?)
            .map_err(|w| bad(oln, &w))?;
            if vals.len() != d {
                return Err(bad(oln, "offset length mismatch"));
            }
            offset = Some(DVector::from_vec(vals));
        }
        let mut m = Dense::zeros(d, j);
        for col in 0..j {
            let (bln, bline) = pending.pop().ok_or_else(|| bad(ln, "missing basis row"))?;
            let vals = parse_floats(bline.strip_prefix("basis").ok_or_else(|| {
                bad(bln, "expected 'basis' line")
            })?)
            .map_err(|w| bad(bln, &w))?;
            if vals.len() != d {
                return Err(bad(bln, "basis row length mismatch"));
            }
            for (r, v) in vals.into_iter().enumerate() {
                m[(r, col)] = v;
            }
        }
        let basis = OrthonormalBasis::new(m)?;
        let sub = match offset {
            Some(o) => Subspace::affine(basis, o)?,
            None => Subspace::linear(basis),
        };
        subspaces.push(sub);
    }
    ClosedSet::new(subspaces)
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad float '{t}'")))
        .collect()
}

#[cfg(test)]
mod tests;
