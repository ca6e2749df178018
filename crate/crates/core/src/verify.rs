//! Executable checks for every inequality the construction relies on, plus
//! a statistical suite that samples sketch seeds and closed sets.

use crate::coreset::{
    build_projective_coreset, build_subspace_coreset, coreset_cost, Coreset, CoresetParams,
};
use crate::error::{Error, Result};
use crate::geometry::{dist2_matrix_to_closedset, random_closed_set, ClosedSet};
use crate::matrix::{
    best_rank_m_residual, full_svd, orthonormalize, project_rows, DataMatrix, Dense,
    OrthonormalBasis,
};
use crate::util::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Dense eigensolves of proof-side quantities are confined to desk scale.
pub const DESK_SCALE_DIM: usize = 500;

/// Outcome of one statistical suite.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub max_relative_error: f64,
    pub epsilon_budget: f64,
    pub seeds_used: Vec<u64>,
    pub passed: bool,
}

impl BoundReport {
    /// Machine-readable key=value rendering, one line.
    pub fn to_kv(&self) -> String {
        format!(
            "suite={} trials={} violations={} max_rel_err={:.6e} budget={:.6e} seeds={} passed={}",
            self.name,
            self.trials,
            self.violations,
            self.max_relative_error,
            self.epsilon_budget,
            self.seeds_used.len(),
            self.passed
        )
    }
}

/// Relative coreset-cost error against the brute-force distance:
/// |(dist^2(A*, C) + Delta*) - dist^2(A, C)| / dist^2(A, C).
///
/// A zero denominator with matching zero cost reports 0; a zero denominator
/// with nonzero coreset cost reports infinity (degenerate instance).
pub fn check_theorem1(a: &DataMatrix, coreset: &Coreset, set: &ClosedSet) -> Result<f64> {
    let exact = dist2_matrix_to_closedset(a, set)?;
    let approx = coreset_cost(coreset, set)?;
    let scale = a.frobenius_norm_sq();
    if exact <= 1e-12 * scale.max(1.0) {
        if (approx - exact).abs() <= 1e-10 * scale.max(1.0) {
            return Ok(0.0);
        }
        return Ok(f64::INFINITY);
    }
    Ok((approx - exact).abs() / exact)
}

/// Both sides of the subspace-reduction bound
/// 0 <= |AX|^2 - |A~X|^2 <= 2 eps |AX_perp|^2, with 1e-8 |A|_F^2 slack.
#[derive(Debug, Clone, Copy)]
pub struct Lemma2Check {
    pub value: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn check_lemma2_bound(
    a: &DataMatrix,
    atilde_basis: &OrthonormalBasis,
    x: &OrthonormalBasis,
    eps: f64,
) -> Result<Lemma2Check> {
    let ax = project_rows(a, x)?;
    let ax_sq: f64 = ax.iter().map(|v| v * v).sum();
    // A~ X = A R' (R'^T X); the n x m and m x j factors stay thin.
    let ar = project_rows(a, atilde_basis)?;
    let g = atilde_basis.columns().transpose() * x.columns();
    let atx = &ar * &g;
    let atx_sq: f64 = atx.iter().map(|v| v * v).sum();
    let fro = a.frobenius_norm_sq();
    let perp_sq = (fro - ax_sq).max(0.0);
    let value = ax_sq - atx_sq;
    let slack = 1e-8 * fro;
    Ok(Lemma2Check {
        value,
        lower_ok: value >= -slack,
        upper_ok: value <= 2.0 * eps * perp_sq + slack,
    })
}

/// Smallest eigenvalue of M = A^T A - A~^T A~, which the PSD argument says
/// is nonnegative up to round-off.
pub fn check_psd_gap(a: &DataMatrix, atilde_basis: &OrthonormalBasis) -> Result<f64> {
    let d = a.cols();
    if d > DESK_SCALE_DIM {
        return Err(Error::TooLarge {
            dim: d,
            limit: DESK_SCALE_DIM,
        });
    }
    let m = psd_gap_matrix(a, atilde_basis)?;
    let eig = m.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// M = A^T A - A~^T A~ for A~ = A R' R'^T (desk-scale only; test oracle).
pub fn psd_gap_matrix(a: &DataMatrix, atilde_basis: &OrthonormalBasis) -> Result<Dense> {
    let ata = a.to_dense().transpose() * a.to_dense();
    let ar = project_rows(a, atilde_basis)?; // n x m
    let art = &ar.transpose() * &ar; // m x m
    let r = atilde_basis.columns();
    let atilde_gram = r * &art * r.transpose();
    Ok(ata - atilde_gram)
}

/// Both sides of the projection-difference bound
/// |A* X* X*^T - A X* X*^T|_F^2 <= (eps^2 / 26) |A X*_perp|_F^2.
#[derive(Debug, Clone, Copy)]
pub struct Lemma3Check {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn check_lemma3(
    a: &DataMatrix,
    coreset: &Coreset,
    x_star: &OrthonormalBasis,
) -> Result<Lemma3Check> {
    let eps = coreset.params.epsilon;
    // (A* - A) X* stays thin: A* X* = projected (R*^T X*).
    let g = coreset.basis.columns().transpose() * x_star.columns();
    let astar_x = &coreset.projected * &g;
    let a_x = project_rows(a, x_star)?;
    let diff = astar_x - &a_x;
    let value: f64 = diff.iter().map(|v| v * v).sum();
    let ax_sq: f64 = a_x.iter().map(|v| v * v).sum();
    let fro = a.frobenius_norm_sq();
    let perp_sq = (fro - ax_sq).max(0.0);
    let bound = eps * eps / 26.0 * perp_sq;
    Ok(Lemma3Check {
        value,
        bound,
        holds: value <= bound + 1e-8 * fro,
    })
}

/// The rank-truncation chain: sum of the top-j squared singular values of
/// A - A~ is at most (1 + eps) * |A - A^(m)|_F^2 minus the tail beyond
/// m + j. Evaluated with full SVDs; desk scale.
#[derive(Debug, Clone, Copy)]
pub struct ChainCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_truncation_chain(
    a: &DataMatrix,
    atilde_basis: &OrthonormalBasis,
    m: usize,
    j: usize,
    eps: f64,
) -> Result<ChainCheck> {
    let svd_a = full_svd(a)?;
    let a_dense = a.to_dense();
    let r = atilde_basis.columns();
    let atilde = &a_dense * r * r.transpose();
    let diff = DataMatrix::from_dense(a_dense - atilde)?;
    let svd_diff = full_svd(&diff)?;
    let lhs: f64 = svd_diff
        .singular_values
        .iter()
        .take(j)
        .map(|s| s * s)
        .sum();
    let tail_m = best_rank_m_residual(&svd_a, m);
    let tail_mj = best_rank_m_residual(&svd_a, m + j);
    let rhs = (1.0 + eps) * tail_m - tail_mj;
    let fro = a.frobenius_norm_sq();
    Ok(ChainCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-6 * fro,
    })
}

/// Random orthonormal basis of the given rank (suite helper).
pub fn random_orthonormal(d: usize, rank: usize, seed: u64) -> OrthonormalBasis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Dense::zeros(d, rank);
    for c in 0..rank {
        for r in 0..d {
            m[(r, c)] = rng.sample(StandardNormal);
        }
    }
    orthonormalize(&m)
}

/// Statistical verification across sketch seeds and sampled closed sets.
///
/// A seed passes a suite when it produces zero in-seed violations; a suite
/// passes when the fraction of passing seeds is at least 1 - delta. Builder
/// failures count as violations for the affected seed.
pub fn run_suite(
    a: &DataMatrix,
    params: &CoresetParams,
    n_closed_sets: usize,
    n_seeds: usize,
    master_seed: u64,
    offset_scale: f64,
) -> Result<Vec<BoundReport>> {
    if n_closed_sets == 0 {
        return Err(Error::Precondition(
            "n_closed_sets must be positive".into(),
        ));
    }
    if n_seeds == 0 {
        return Err(Error::Precondition("n_seeds must be positive".into()));
    }
    if !(offset_scale.is_finite() && offset_scale >= 0.0) {
        return Err(Error::Precondition(format!(
            "offset_scale must be finite and nonnegative, got {offset_scale}"
        )));
    }
    let (_n, d) = (a.rows(), a.cols());
    params.validate_against(a.rows(), d)?;

    let mut seeds = Vec::with_capacity(n_seeds);
    for i in 0..n_seeds {
        seeds.push(derive_seed(master_seed, i as u64));
    }

    let mut theorem1 = SuiteAcc::new("theorem1", params.epsilon);
    let mut lemma3 = SuiteAcc::new("lemma3", params.epsilon * params.epsilon / 26.0);
    let mut lemma2 = SuiteAcc::new("lemma2", 2.0 * params.epsilon);
    let run_psd = d <= DESK_SCALE_DIM;
    let mut psd = SuiteAcc::new("psd_gap", 1e-8);

    let j_star = params.j_star();
    let fro = a.frobenius_norm_sq();
    for (si, &seed) in seeds.iter().enumerate() {
        // The theorem1 and lemma3 checks share the projective coreset for this seed.
        match build_projective_coreset(a, params, seed) {
            Err(_) => {
                theorem1.seed_error();
                lemma3.seed_error();
                if run_psd {
                    psd.seed_error();
                }
            }
            Ok(coreset) => {
                let mut t1_ok = true;
                for ci in 0..n_closed_sets {
                    let cs_seed = derive_seed(master_seed, (1 + si as u64) << 20 | ci as u64);
                    let affine = params.affine && ci % 2 == 1;
                    let set =
                        random_closed_set(d, params.k, params.j, affine, offset_scale, cs_seed);
                    let err = check_theorem1(a, &coreset, &set)?;
                    if err.is_finite() {
                        theorem1.observe(err, err > params.epsilon, &mut t1_ok);
                    }
                }
                theorem1.finish_seed(t1_ok);

                let mut l3_ok = true;
                for ci in 0..n_closed_sets {
                    let xs_seed = derive_seed(master_seed, (2 + si as u64) << 20 | ci as u64);
                    let x_star = random_orthonormal(d, j_star, xs_seed);
                    let check = check_lemma3(a, &coreset, &x_star)?;
                    let rel = if check.bound > 0.0 {
                        check.value / check.bound
                    } else {
                        0.0
                    };
                    lemma3.observe(rel, !check.holds, &mut l3_ok);
                }
                lemma3.finish_seed(l3_ok);

                if run_psd {
                    let mut ok = true;
                    let lam_min = check_psd_gap(a, &coreset.basis)?;
                    psd.observe(
                        (-lam_min).max(0.0) / fro.max(1.0),
                        lam_min < -1e-8 * fro,
                        &mut ok,
                    );
                    psd.finish_seed(ok);
                }
            }
        }

        // The lemma2 check runs on the subspace construction at (j, eps).
        match build_subspace_coreset(a, params.j, params.epsilon, params.delta, seed) {
            Err(_) => lemma2.seed_error(),
            Ok(sub) => {
                let mut ok = true;
                for ci in 0..n_closed_sets {
                    let x_seed = derive_seed(master_seed, (3 + si as u64) << 20 | ci as u64);
                    let x = random_orthonormal(d, params.j, x_seed);
                    let check = check_lemma2_bound(a, &sub.basis, &x, params.epsilon)?;
                    let rel = check.value.abs() / fro.max(1.0);
                    lemma2.observe(rel, !(check.lower_ok && check.upper_ok), &mut ok);
                }
                lemma2.finish_seed(ok);
            }
        }
    }

    let rate_needed = 1.0 - params.delta;
    let mut reports = vec![
        theorem1.report(&seeds, rate_needed),
        lemma2.report(&seeds, rate_needed),
        lemma3.report(&seeds, rate_needed),
    ];
    if run_psd {
        reports.push(psd.report(&seeds, rate_needed));
    }
    Ok(reports)
}

struct SuiteAcc {
    name: &'static str,
    budget: f64,
    trials: usize,
    violations: usize,
    max_rel: f64,
    seeds_total: usize,
    seeds_passed: usize,
}

impl SuiteAcc {
    fn new(name: &'static str, budget: f64) -> Self {
        SuiteAcc {
            name,
            budget,
            trials: 0,
            violations: 0,
            max_rel: 0.0,
            seeds_total: 0,
            seeds_passed: 0,
        }
    }

    fn observe(&mut self, rel: f64, violated: bool, seed_ok: &mut bool) {
        self.trials += 1;
        if rel.is_finite() {
            self.max_rel = self.max_rel.max(rel);
        }
        if violated {
            self.violations += 1;
            *seed_ok = false;
        }
    }

    fn finish_seed(&mut self, ok: bool) {
        self.seeds_total += 1;
        if ok {
            self.seeds_passed += 1;
        }
    }

    fn seed_error(&mut self) {
        self.trials += 1;
        self.violations += 1;
        self.seeds_total += 1;
    }

    fn report(self, seeds: &[u64], rate_needed: f64) -> BoundReport {
        let rate = if self.seeds_total > 0 {
            self.seeds_passed as f64 / self.seeds_total as f64
        } else {
            0.0
        };
        BoundReport {
            name: self.name.to_string(),
            trials: self.trials,
            violations: self.violations,
            max_relative_error: self.max_rel,
            epsilon_budget: self.budget,
            seeds_used: seeds.to_vec(),
            passed: rate >= rate_needed,
        }
    }
}
