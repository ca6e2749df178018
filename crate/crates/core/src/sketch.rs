//! JL sign sketching and the two-pass randomized low-rank basis.
//!
//! The sketch matrix S has i.i.d. uniform +-1 entries generated from a
//! ChaCha8 stream keyed by the seed: entries are consumed in row-major order
//! (row 0 left to right first), one bit per entry, 64 entries per generator
//! word, least-significant bit first. A sketch with more rows and the same
//! seed therefore extends a smaller one row by row.

use crate::error::{Error, Result};
use crate::matrix::{orthonormalize, DataMatrix, Dense, OrthonormalBasis};
use crate::matrix::{right_factors, RANK_CUTOFF};
use crate::stream::{InMemorySource, MatrixSource, RowChunk};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Parameters of the low-rank sketch of Theorem-2 style: target rank m,
/// accuracy epsilon, failure probability delta, and the user-overridable
/// constant in front of the asymptotic row count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    pub target_rank: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub constant_c: f64,
}

impl SketchParams {
    pub fn new(target_rank: usize, epsilon: f64, delta: f64, constant_c: f64) -> Result<Self> {
        if target_rank < 1 {
            return Err(Error::InvalidParams("target rank must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be in (0, 1], got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta must be in (0, 1), got {delta}"
            )));
        }
        if !(constant_c > 0.0) {
            return Err(Error::InvalidParams("constant c must be positive".into()));
        }
        Ok(SketchParams {
            target_rank,
            epsilon,
            delta,
            constant_c,
        })
    }
}

/// Sketch row count: ceil(c * (m/eps + m ln(max(m, 2))) * ln(1/delta)),
/// floored at m + 1. Natural logarithms throughout.
pub fn sketch_dim(p: &SketchParams) -> usize {
    let m = p.target_rank as f64;
    let log_m = (m.max(2.0)).ln();
    let raw = p.constant_c * (m / p.epsilon + m * log_m) * (1.0 / p.delta).ln();
    (raw.ceil() as usize).max(p.target_rank + 1)
}

/// The r x n sign matrix S together with its seed. Regeneration from
/// (r, n, seed) is bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchMatrix {
    rows: usize,
    cols: usize,
    seed: u64,
    /// Row-major signs, each +1 or -1.
    signs: Vec<i8>,
}

pub fn make_jl_sketch(r: usize, n: usize, seed: u64) -> SketchMatrix {
    assert!(r >= 1 && n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = r * n;
    let mut signs = Vec::with_capacity(total);
    let mut word = 0u64;
    let mut bits_left = 0u32;
    for _ in 0..total {
        if bits_left == 0 {
            word = rng.next_u64();
            bits_left = 64;
        }
        signs.push(if word & 1 == 1 { 1 } else { -1 });
        word >>= 1;
        bits_left -= 1;
    }
    SketchMatrix {
        rows: r,
        cols: n,
        seed,
        signs,
    }
}

impl SketchMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.signs[row * self.cols + col]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Column-major copy; column i of S is contiguous, which is the access
    /// pattern of the streaming accumulation.
    fn to_col_major(&self) -> Vec<i8> {
        let (r, n) = (self.rows, self.cols);
        let mut out = vec![0i8; r * n];
        for row in 0..r {
            for col in 0..n {
                out[col * r + row] = self.signs[row * n + col];
            }
        }
        out
    }
}

/// S * A. The sparse path costs O(nnz(A) * r) scalar operations.
pub fn apply_sketch(s: &SketchMatrix, a: &DataMatrix) -> Result<Dense> {
    if s.cols != a.rows() {
        return Err(Error::dim("apply_sketch", s.cols, a.rows()));
    }
    let mut src = InMemorySource::new(a);
    let (sa, _fro) = accumulate_sketch(&mut src, s)?;
    Ok(sa)
}

/// Pass 1 workhorse: accumulates S*A (r x d) and the squared Frobenius norm
/// of A in a single sequential scan. Accumulation order per output slot
/// follows the source's entry order, so identical entry sequences give
/// bit-identical results.
fn accumulate_sketch<S: MatrixSource + ?Sized>(
    src: &mut S,
    sketch: &SketchMatrix,
) -> Result<(Dense, f64)> {
    let (r, d) = (sketch.rows, src.cols());
    let signs = sketch.to_col_major();
    let mut sa = Dense::zeros(r, d);
    let mut fro = 0.0f64;
    {
        let sa_data = sa.as_mut_slice();
        let mut add = |row: usize, col: usize, v: f64| {
            if v == 0.0 {
                return;
            }
            fro += v * v;
            let s_col = &signs[row * r..(row + 1) * r];
            let out = &mut sa_data[col * r..(col + 1) * r];
            for t in 0..r {
                out[t] += (s_col[t] as f64) * v;
            }
        };
        src.scan(&mut |chunk| match chunk {
            RowChunk::Dense { row, values } => {
                for (c, &v) in values.iter().enumerate() {
                    add(row, c, v);
                }
            }
            RowChunk::Entries { row, cols, values } => {
                for (&c, &v) in cols.iter().zip(values) {
                    add(row, c, v);
                }
            }
        })?;
    }
    Ok((sa, fro))
}

/// Pass 2 workhorse: B = A * Q accumulated entry by entry.
fn accumulate_projection<S: MatrixSource + ?Sized>(src: &mut S, q: &Dense) -> Result<Dense> {
    let (n, rho) = (src.rows(), q.ncols());
    // Work in transposed layout so both the Q row and the B row are
    // contiguous in the inner loop.
    let qt = q.transpose();
    let qt_data = qt.as_slice();
    let mut bt = Dense::zeros(rho, n);
    {
        let bt_data = bt.as_mut_slice();
        let mut add = |row: usize, col: usize, v: f64| {
            if v == 0.0 {
                return;
            }
            let qc = &qt_data[col * rho..(col + 1) * rho];
            let out = &mut bt_data[row * rho..(row + 1) * rho];
            for t in 0..rho {
                out[t] += v * qc[t];
            }
        };
        src.scan(&mut |chunk| match chunk {
            RowChunk::Dense { row, values } => {
                for (c, &v) in values.iter().enumerate() {
                    add(row, c, v);
                }
            }
            RowChunk::Entries { row, cols, values } => {
                for (&c, &v) in cols.iter().zip(values) {
                    add(row, c, v);
                }
            }
        })?;
    }
    Ok(bt.transpose())
}

/// Output of the two-pass construction: the basis R' approximating the top
/// right singular vectors, with the achieved rank flagged if the sketch's
/// row space could not supply the requested rank.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankBasis {
    pub basis: OrthonormalBasis,
    pub requested_rank: usize,
    pub shortfall: bool,
}

/// Per-phase wall-clock timings of a two-pass build.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhaseTimings {
    pub sketch: Duration,
    pub orthonormalize: Duration,
    pub small_svd: Duration,
    pub project: Duration,
}

/// Everything the coreset layer needs from the two passes: the basis R',
/// the projected matrix A * R', and ||A||_F^2 accumulated on the fly.
#[derive(Debug, Clone)]
pub struct TwoPassSketch {
    pub basis: LowRankBasis,
    pub projected: Dense,
    pub fro_norm_sq: f64,
    pub sketch_rows: usize,
    pub timings: PhaseTimings,
}

/// Two-pass low-rank approximation over a streaming source.
///
/// Pass 1 forms SA; Q spans rowspan(SA). Pass 2 forms B = A*Q; the top
/// target-rank right singular directions W of B give R' = Q*W, and
/// A*R' = B*W comes for free. The sketch row count is clamped at the number
/// of data rows: beyond that the sketch already captures the full row space.
pub fn two_pass_from_source<S: MatrixSource + ?Sized>(
    src: &mut S,
    p: &SketchParams,
    seed: u64,
) -> Result<TwoPassSketch> {
    let (n, d) = (src.rows(), src.cols());
    if p.target_rank > n.min(d) {
        return Err(Error::Precondition(format!(
            "target rank {} exceeds min(n, d) = {}",
            p.target_rank,
            n.min(d)
        )));
    }
    let r = sketch_dim(p).min(n);
    let sketch = make_jl_sketch(r, n, seed);

    let t0 = Instant::now();
    let (sa, fro) = accumulate_sketch(src, &sketch)?;
    let t_sketch = t0.elapsed();

    let t0 = Instant::now();
    let q_basis = orthonormalize(&sa.transpose());
    let t_ortho = t0.elapsed();

    if q_basis.rank() == 0 {
        // Zero matrix: rank-0 basis, empty projection.
        return Ok(TwoPassSketch {
            basis: LowRankBasis {
                basis: OrthonormalBasis::empty(d),
                requested_rank: p.target_rank,
                shortfall: true,
            },
            projected: Dense::zeros(n, 0),
            fro_norm_sq: fro,
            sketch_rows: r,
            timings: PhaseTimings {
                sketch: t_sketch,
                orthonormalize: t_ortho,
                ..Default::default()
            },
        });
    }

    let t0 = Instant::now();
    let b = accumulate_projection(src, q_basis.columns())?;
    let t_project = t0.elapsed();

    let t0 = Instant::now();
    let b_dm = DataMatrix::from_dense(b.clone())?;
    let (w, sigma_sq) = right_factors(&b_dm)?;
    let keep = effective_rank(&sigma_sq).min(p.target_rank);
    let w_kept = w.columns(0, keep).into_owned();
    let r_prime = q_basis.columns() * &w_kept;
    let projected = &b * &w_kept;
    let t_svd = t0.elapsed();

    let basis = OrthonormalBasis::new(r_prime)?;
    Ok(TwoPassSketch {
        basis: LowRankBasis {
            basis,
            requested_rank: p.target_rank,
            shortfall: keep < p.target_rank,
        },
        projected,
        fro_norm_sq: fro,
        sketch_rows: r,
        timings: PhaseTimings {
            sketch: t_sketch,
            orthonormalize: t_ortho,
            small_svd: t_svd,
            project: t_project,
        },
    })
}

/// Two-pass low-rank basis of an in-memory matrix.
pub fn two_pass_low_rank_basis(
    a: &DataMatrix,
    p: &SketchParams,
    seed: u64,
) -> Result<LowRankBasis> {
    let mut src = InMemorySource::new(a);
    Ok(two_pass_from_source(&mut src, p, seed)?.basis)
}

fn effective_rank(sigma_sq_desc: &[f64]) -> usize {
    let max = sigma_sq_desc.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    let cut = RANK_CUTOFF * RANK_CUTOFF * max;
    sigma_sq_desc.iter().take_while(|&&s| s > cut).count()
}
