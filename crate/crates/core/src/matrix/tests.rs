use super::*;
use proptest::prelude::*;

fn dm(rows: &[Vec<f64>]) -> DataMatrix {
    DataMatrix::from_rows(rows).unwrap()
}

/// Independent oracle: squared singular values as eigenvalues of A^T A,
/// straight from the nalgebra symmetric eigensolver.
fn gram_eigvals(a: &DataMatrix) -> Vec<f64> {
    let d = a.to_dense();
    let g = d.transpose() * d;
    let mut vals: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
    vals
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn frobenius_small_cases() {
    assert_eq!(dm(&[vec![1.0, 2.0], vec![3.0, 4.0]]).frobenius_norm_sq(), 30.0);
    let eye = DataMatrix::from_dense(Dense::identity(3, 3)).unwrap();
    assert_eq!(eye.frobenius_norm_sq(), 3.0);
}

#[test]
fn frobenius_matches_singular_values() {
    let a = random_dense(20, 10, 7);
    let from_eig: f64 = gram_eigvals(&a).iter().sum();
    assert!(rel_err(a.frobenius_norm_sq(), from_eig) < 1e-8);
}

#[test]
fn multiply_identity_and_zero() {
    let b = random_dense(3, 4, 1).to_dense();
    let eye = DataMatrix::from_dense(Dense::identity(3, 3)).unwrap();
    assert_eq!(eye.multiply(&b).unwrap(), b);

    let zero = DataMatrix::from_dense(Dense::zeros(2, 3)).unwrap();
    assert_eq!(zero.multiply(&b).unwrap(), Dense::zeros(2, 4));
}

#[test]
fn multiply_dimension_mismatch_rejected() {
    let a = random_dense(3, 4, 1);
    let b = Dense::zeros(3, 2);
    let err = a.multiply(&b).unwrap_err();
    assert!(err.to_string().contains("dimension mismatch"));
}

#[test]
fn sparse_multiply_matches_dense_triple_loop() {
    let a = random_sparse(30, 20, 0.15, 42);
    let b = random_dense(20, 5, 43).to_dense();
    let got = a.multiply(&b).unwrap();
    // dense triple-loop oracle
    let ad = a.to_dense();
    for i in 0..30 {
        for j in 0..5 {
            let mut acc = 0.0;
            for t in 0..20 {
                acc += ad[(i, t)] * b[(t, j)];
            }
            assert!((got[(i, j)] - acc).abs() < 1e-12);
        }
    }
}

#[test]
fn orthonormalize_preserves_orthonormal_input_span() {
    let q0 = orthonormalize(&random_dense(8, 3, 5).to_dense());
    let q1 = orthonormalize(q0.columns());
    assert_eq!(q1.rank(), 3);
    // same span: projecting q0 onto q1 loses nothing
    let proj = q1.columns() * (q1.columns().transpose() * q0.columns());
    assert!((proj - q0.columns()).norm() < 1e-8);
}

#[test]
fn orthonormalize_duplicate_direction_rank_one() {
    let m = Dense::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(orthonormalize(&m).rank(), 1);
}

#[test]
fn orthonormalize_zero_input_rank_zero() {
    let q = orthonormalize(&Dense::zeros(4, 3));
    assert_eq!(q.rank(), 0);
    assert_eq!(q.ambient_dim(), 4);
}

#[test]
fn orthonormalize_random_full_rank_residual() {
    let m = random_dense(10, 4, 11).to_dense();
    let q = orthonormalize(&m);
    assert_eq!(q.rank(), 4);
    let resid = &m - q.columns() * (q.columns().transpose() * &m);
    assert!(resid.norm() <= 1e-8 * m.norm());
}

#[test]
fn full_svd_diagonal() {
    let a = dm(&[
        vec![3.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    let f = full_svd(&a).unwrap();
    assert_eq!(f.singular_values, vec![3.0, 2.0, 1.0]);
}

#[test]
fn full_svd_rank_one() {
    let u = random_dense(6, 1, 3).to_dense().normalize();
    let v = random_dense(4, 1, 4).to_dense().normalize();
    let a = DataMatrix::from_dense(&u * v.transpose()).unwrap();
    let f = full_svd(&a).unwrap();
    assert_eq!(f.rank(), 1);
    assert!((f.singular_values[0] - 1.0).abs() < 1e-10);
}

#[test]
fn full_svd_matches_gram_eigenvalues() {
    let a = random_dense(12, 7, 9);
    let f = full_svd(&a).unwrap();
    let oracle = gram_eigvals(&a);
    for (i, s) in f.singular_values.iter().enumerate() {
        assert!(rel_err(s * s, oracle[i]) < 1e-8, "sigma {i}");
    }
}

#[test]
fn full_svd_invariants_hold() {
    let a = random_dense(15, 9, 21);
    let f = full_svd(&a).unwrap();
    // nonincreasing
    for w in f.singular_values.windows(2) {
        assert!(w[0] >= w[1]);
    }
    // orthonormality within 1e-10
    let utu = f.left_vectors.transpose() * &f.left_vectors;
    let vtv = f.right_vectors.transpose() * &f.right_vectors;
    let eye = Dense::identity(f.rank(), f.rank());
    assert!((utu - &eye).abs().max() < 1e-10);
    assert!((vtv - &eye).abs().max() < 1e-10);
    // reconstruction
    let mut us = f.left_vectors.clone();
    for (i, s) in f.singular_values.iter().enumerate() {
        let mut c = us.column_mut(i);
        c *= *s;
    }
    let recon = us * f.right_vectors.transpose();
    let err = (a.to_dense() - recon).norm_squared();
    assert!(err <= 1e-8 * a.frobenius_norm_sq());
}

#[test]
fn full_svd_sign_convention_deterministic() {
    let a = random_dense(10, 6, 33);
    let f1 = full_svd(&a).unwrap();
    let f2 = full_svd(&a).unwrap();
    assert_eq!(f1.right_vectors, f2.right_vectors);
    assert_eq!(f1.left_vectors, f2.left_vectors);
    for j in 0..f1.rank() {
        let col = f1.right_vectors.column(j);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, |m, x| m.max(x.abs()));
        let first = col.iter().position(|x| x.abs() == max).unwrap();
        assert!(col[first] >= 0.0);
    }
}

#[test]
fn best_rank_residual_cases() {
    let a = dm(&[
        vec![3.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ]);
    let f = full_svd(&a).unwrap();
    assert!((best_rank_m_residual(&f, 2) - 1.0).abs() < 1e-12);
    assert_eq!(best_rank_m_residual(&f, 3), 0.0);
    assert_eq!(best_rank_m_residual(&f, 10), 0.0);
}

#[test]
fn best_rank_residual_matches_explicit_projection() {
    let a = random_dense(10, 6, 13);
    let f = full_svd(&a).unwrap();
    let v3 = f.right_vectors.columns(0, 3);
    let ad = a.to_dense();
    let resid = &ad - &ad * v3 * v3.transpose();
    assert!(rel_err(best_rank_m_residual(&f, 3), resid.norm_squared()) < 1e-8);
}

#[test]
fn project_rows_identity_basis() {
    let a = random_dense(5, 4, 2);
    let got = project_rows(&a, &OrthonormalBasis::identity(4)).unwrap();
    assert_eq!(got, a.to_dense());
}

#[test]
fn project_rows_orthogonal_rows_give_zero() {
    // rows live in span(e1, e2); basis is span(e3, e4)
    let a = dm(&[vec![1.0, 2.0, 0.0, 0.0], vec![-3.0, 1.0, 0.0, 0.0]]);
    let mut m = Dense::zeros(4, 2);
    m[(2, 0)] = 1.0;
    m[(3, 1)] = 1.0;
    let b = OrthonormalBasis::new(m).unwrap();
    assert_eq!(project_rows(&a, &b).unwrap(), Dense::zeros(2, 2));
}

#[test]
fn project_rows_pythagorean_with_complement() {
    let a = random_dense(12, 8, 17);
    let b = orthonormalize(&random_dense(8, 3, 18).to_dense());
    let comp = b.complement();
    assert_eq!(comp.rank(), 5);
    let on = project_rows(&a, &b).unwrap().norm_squared();
    let off = project_rows(&a, &comp).unwrap().norm_squared();
    assert!(rel_err(a.frobenius_norm_sq() - on, off) < 1e-8);
}

#[test]
fn fact7_best_subspace_is_optimal() {
    let a = random_dense(20, 10, 55);
    let f = full_svd(&a).unwrap();
    let j = 3;
    let tail = best_rank_m_residual(&f, j);
    let fro = a.frobenius_norm_sq();
    for trial in 0..1000u64 {
        let x = orthonormalize(&random_dense(10, j, 1000 + trial).to_dense());
        let on = project_rows(&a, &x).unwrap().norm_squared();
        let off = fro - on;
        assert!(off >= tail - 1e-8 * fro, "trial {trial}");
    }
}

#[test]
fn csr_validation_rejects_bad_input() {
    // unsorted columns
    assert!(DataMatrix::from_csr(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 2.0]).is_err());
    // column out of range
    assert!(DataMatrix::from_csr(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
    // non-finite
    assert!(DataMatrix::from_csr(1, 3, vec![0, 1], vec![0], vec![f64::NAN]).is_err());
    assert!(DataMatrix::from_rows(&[vec![1.0, f64::INFINITY]]).is_err());
}

#[test]
fn nnz_tracking() {
    let a = dm(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
    assert_eq!(a.nnz(), 2);
    let s = DataMatrix::from_triplets(3, 3, &[(0, 0, 5.0)]).unwrap();
    assert_eq!(s.nnz(), 1);
    assert!(s.is_sparse());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pythagorean_identity(seed in 0u64..1000, j in 1usize..5) {
        let a = random_dense(9, 6, seed);
        let x = orthonormalize(&random_dense(6, j, seed + 7777).to_dense());
        let on = project_rows(&a, &x).unwrap().norm_squared();
        let off = project_rows(&a, &x.complement()).unwrap().norm_squared();
        let fro = a.frobenius_norm_sq();
        prop_assert!((on + off - fro).abs() <= 1e-8 * fro);
    }

    #[test]
    fn trace_identity(seed in 0u64..1000) {
        let a = random_dense(7, 5, seed);
        let ad = a.to_dense();
        let tr = (ad.transpose() * &ad).trace();
        prop_assert!((tr - a.frobenius_norm_sq()).abs() <= 1e-10 * tr.abs().max(1.0));
    }

    #[test]
    fn projection_contracts_norm(seed in 0u64..1000, k in 1usize..5, l in 1usize..5) {
        let x = orthonormalize(&random_dense(8, k, seed).to_dense());
        let m = random_dense(8, l, seed + 31).to_dense();
        let projected = x.columns() * (x.columns().transpose() * &m);
        prop_assert!(projected.norm_squared() <= m.norm_squared() + 1e-12);
    }
}
