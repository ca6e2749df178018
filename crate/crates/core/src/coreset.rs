//! Coreset construction: the randomized projection-cost-preserving sketch
//! for projective clustering, the subspace-clustering variant, and the
//! exact-SVD baseline it is measured against.

mod serialize;

pub use serialize::{deserialize_coreset, serialize_coreset};

use crate::error::{Error, Result};
use crate::geometry::ClosedSet;
use crate::matrix::{
    best_rank_m_residual, project_rows, right_factors, DataMatrix, Dense, OrthonormalBasis,
};
use crate::sketch::{two_pass_from_source, PhaseTimings, SketchParams};
use crate::stream::{InMemorySource, MatrixSource};
use std::time::{Duration, Instant};

/// How the tail energy was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMode {
    /// ||A||_F^2 - ||A R*||_F^2, available without an exact SVD.
    Estimated,
    /// Sum of squared singular values beyond the kept rank, from a full SVD.
    Exact,
}

/// Parameters of a projective-clustering coreset: k subspaces of dimension
/// at most j, target accuracy epsilon, failure probability delta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoresetParams {
    pub k: usize,
    pub j: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub affine: bool,
    pub rank_override: Option<usize>,
    /// Constant in front of the sketch row-count formula; 1.0 unless tuned.
    pub sketch_constant: f64,
}

impl CoresetParams {
    pub fn new(k: usize, j: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if k < 1 || j < 1 {
            return Err(Error::InvalidParams("k and j must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be in (0, 1), got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "delta must be in (0, 1), got {delta}"
            )));
        }
        Ok(CoresetParams {
            k,
            j,
            epsilon,
            delta,
            affine: false,
            rank_override: None,
            sketch_constant: 1.0,
        })
    }

    pub fn with_affine(mut self, affine: bool) -> Self {
        self.affine = affine;
        self
    }

    pub fn with_rank_override(mut self, rank: Option<usize>) -> Self {
        self.rank_override = rank;
        self
    }

    pub fn with_sketch_constant(mut self, c: f64) -> Self {
        self.sketch_constant = c;
        self
    }

    /// j* = k(j + 1), the combined subspace dimension of the reduction.
    pub fn j_star(&self) -> usize {
        self.k * (self.j + 1)
    }

    /// Shape preconditions checked against the data matrix.
    pub fn validate_against(&self, n: usize, d: usize) -> Result<()> {
        if !(self.j + 1 < d) {
            return Err(Error::Precondition(format!(
                "require j < d - 1 (j = {}, d = {d})",
                self.j
            )));
        }
        if !(self.k + 1 < n) {
            return Err(Error::Precondition(format!(
                "require k < n - 1 (k = {}, n = {n})",
                self.k
            )));
        }
        if self.j_star() > d - 1 {
            return Err(Error::Precondition(format!(
                "require k(j+1) <= d - 1 (k(j+1) = {}, d = {d})",
                self.j_star()
            )));
        }
        if let Some(r) = self.rank_override {
            if r < 1 || r > d {
                return Err(Error::Precondition(format!(
                    "rank override {r} outside [1, {d}]"
                )));
            }
        }
        Ok(())
    }
}

/// Coreset rank m* = ceil(52 j* / eps^2), clamped to d; the clamped coreset
/// is exact. An explicit override wins.
pub fn projective_rank(p: &CoresetParams, d: usize) -> usize {
    if let Some(r) = p.rank_override {
        return r.min(d);
    }
    let raw = (52.0 * p.j_star() as f64 / (p.epsilon * p.epsilon)).ceil() as usize;
    raw.min(d)
}

/// Subspace-clustering rank m = ceil(j / eps), clamped to d.
pub fn subspace_rank(j: usize, epsilon: f64, d: usize) -> usize {
    let raw = (j as f64 / epsilon).ceil() as usize;
    raw.min(d)
}

/// The built coreset: basis R*, the projected matrix A R*, and the tail
/// energy added back into clustering costs.
#[derive(Debug, Clone)]
pub struct Coreset {
    pub basis: OrthonormalBasis,
    pub projected: Dense,
    pub tail_energy: f64,
    pub params: CoresetParams,
    pub achieved_rank: usize,
    pub seed: u64,
    pub construction_time: Duration,
    pub delta_mode: DeltaMode,
    pub timings: PhaseTimings,
    pub sketch_rows: usize,
}

impl Coreset {
    pub fn rows(&self) -> usize {
        self.projected.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ambient_dim()
    }

    /// Reconstruct A* = projected * R*^T (desk-scale diagnostic).
    pub fn reconstruct(&self) -> Dense {
        &self.projected * self.basis.columns().transpose()
    }

    /// Field equality ignoring wall-clock bookkeeping.
    pub fn same_contents(&self, other: &Coreset) -> bool {
        self.basis == other.basis
            && self.projected == other.projected
            && self.tail_energy == other.tail_energy
            && self.params == other.params
            && self.achieved_rank == other.achieved_rank
            && self.seed == other.seed
            && self.delta_mode == other.delta_mode
    }
}

fn internal_sketch_params(p: &CoresetParams, m_star: usize) -> Result<SketchParams> {
    // Algorithm instantiates the subspace reduction at epsilon^2 / 52.
    let eps_internal = (p.epsilon * p.epsilon / 52.0).min(1.0);
    SketchParams::new(m_star, eps_internal, p.delta, p.sketch_constant)
}

fn finish_build(
    basis: OrthonormalBasis,
    projected: Dense,
    fro_norm_sq: f64,
    params: CoresetParams,
    seed: u64,
    started: Instant,
    timings: PhaseTimings,
    sketch_rows: usize,
) -> Coreset {
    let captured: f64 = projected.iter().map(|v| v * v).sum();
    let tail_energy = (fro_norm_sq - captured).max(0.0);
    let achieved_rank = basis.rank();
    Coreset {
        basis,
        projected,
        tail_energy,
        params,
        achieved_rank,
        seed,
        construction_time: started.elapsed(),
        delta_mode: DeltaMode::Estimated,
        timings,
        sketch_rows,
    }
}

/// Randomized projective-clustering coreset over a streaming source; the
/// source is scanned exactly twice. Tail energy is always estimated here
/// (the exact mode needs the full matrix in memory).
pub fn build_projective_coreset_from_source<S: MatrixSource + ?Sized>(
    src: &mut S,
    p: &CoresetParams,
    seed: u64,
) -> Result<Coreset> {
    let started = Instant::now();
    let (n, d) = (src.rows(), src.cols());
    p.validate_against(n, d)?;
    let m_star = projective_rank(p, d);
    let sp = internal_sketch_params(p, m_star.min(n))?;
    let two_pass = two_pass_from_source(src, &sp, seed)?;
    Ok(finish_build(
        two_pass.basis.basis,
        two_pass.projected,
        two_pass.fro_norm_sq,
        *p,
        seed,
        started,
        two_pass.timings,
        two_pass.sketch_rows,
    ))
}

/// Randomized projective-clustering coreset of an in-memory matrix.
pub fn build_projective_coreset(a: &DataMatrix, p: &CoresetParams, seed: u64) -> Result<Coreset> {
    let mut src = InMemorySource::new(a);
    build_projective_coreset_from_source(&mut src, p, seed)
}

/// As `build_projective_coreset` but with the tail energy recomputed
/// exactly from a full SVD (verification mode).
pub fn build_projective_coreset_mode(
    a: &DataMatrix,
    p: &CoresetParams,
    seed: u64,
    mode: DeltaMode,
) -> Result<Coreset> {
    let mut coreset = build_projective_coreset(a, p, seed)?;
    if mode == DeltaMode::Exact {
        let svd = crate::matrix::full_svd(a)?;
        coreset.tail_energy = best_rank_m_residual(&svd, coreset.achieved_rank);
        coreset.delta_mode = DeltaMode::Exact;
    }
    Ok(coreset)
}

/// Randomized subspace-clustering coreset: rank m = ceil(j / eps), sketch
/// accuracy epsilon applied directly.
pub fn build_subspace_coreset(
    a: &DataMatrix,
    j: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Coreset> {
    let started = Instant::now();
    let (n, d) = (a.rows(), a.cols());
    if j < 1 || j >= d {
        return Err(Error::Precondition(format!(
            "require 1 <= j < d (j = {j}, d = {d})"
        )));
    }
    let m = subspace_rank(j, epsilon, d);
    let sp = SketchParams::new(m.min(n), epsilon, delta, 1.0)?;
    let mut src = InMemorySource::new(a);
    let two_pass = two_pass_from_source(&mut src, &sp, seed)?;
    let params = CoresetParams {
        k: 1,
        j,
        epsilon,
        delta,
        affine: false,
        rank_override: Some(m),
        sketch_constant: 1.0,
    };
    Ok(finish_build(
        two_pass.basis.basis,
        two_pass.projected,
        two_pass.fro_norm_sq,
        params,
        seed,
        started,
        two_pass.timings,
        two_pass.sketch_rows,
    ))
}

/// Deterministic baseline: R* is the exact top right singular vectors and
/// the tail energy is the exact SVD tail.
pub fn exact_svd_coreset(a: &DataMatrix, p: &CoresetParams) -> Result<Coreset> {
    let started = Instant::now();
    let (n, d) = (a.rows(), a.cols());
    p.validate_against(n, d)?;
    let m_star = projective_rank(p, d);
    let (v, sigma_sq) = right_factors(a)?;
    let keep = m_star.min(v.ncols());
    let basis = OrthonormalBasis::new(v.columns(0, keep).into_owned())?;
    let projected = project_rows(a, &basis)?;
    let tail_energy: f64 = sigma_sq.iter().skip(keep).sum();
    Ok(Coreset {
        basis,
        projected,
        tail_energy,
        params: *p,
        achieved_rank: keep,
        seed: 0,
        construction_time: started.elapsed(),
        delta_mode: DeltaMode::Exact,
        timings: PhaseTimings::default(),
        sketch_rows: 0,
    })
}

/// max(0, ||A||_F^2 - ||A R*||_F^2) = ||A - A R* R*^T||_F^2.
pub fn estimate_tail_energy(a: &DataMatrix, basis: &OrthonormalBasis) -> Result<f64> {
    let proj = project_rows(a, basis)?;
    let captured: f64 = proj.iter().map(|v| v * v).sum();
    Ok((a.frobenius_norm_sq() - captured).max(0.0))
}

/// dist^2(A*, C) + Delta*, computed in the m*-dimensional coordinates.
pub fn coreset_cost(c: &Coreset, set: &ClosedSet) -> Result<f64> {
    if set.ambient_dim != c.ambient_dim() {
        return Err(Error::dim("coreset_cost", c.ambient_dim(), set.ambient_dim));
    }
    if set.subspaces.len() > c.params.k {
        return Err(Error::Precondition(format!(
            "closed set has {} subspaces but the coreset covers at most k = {}",
            set.subspaces.len(),
            c.params.k
        )));
    }
    for (i, s) in set.subspaces.iter().enumerate() {
        if s.dim() > c.params.j {
            return Err(Error::Precondition(format!(
                "subspace {i} has dimension {} but the coreset covers at most j = {}",
                s.dim(),
                c.params.j
            )));
        }
        if s.dim() < 1 {
            return Err(Error::Precondition(format!(
                "subspace {i} has dimension 0; the guarantee covers j >= 1"
            )));
        }
        if s.offset().is_some() && !c.params.affine {
            return Err(Error::Precondition(format!(
                "subspace {i} is affine but the coreset was built for linear queries"
            )));
        }
    }
    Ok(set.dist2_in_coordinates(&c.projected, c.basis.columns()) + c.tail_energy)
}
