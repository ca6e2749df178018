use super::*;
use crate::matrix::{project_rows, random_dense};
use crate::util::derive_seed;
use proptest::prelude::*;
use rand::Rng;

fn vec3(x: f64, y: f64, z: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y, z])
}

fn axis(d: usize, i: usize) -> OrthonormalBasis {
    let mut m = Dense::zeros(d, 1);
    m[(i, 0)] = 1.0;
    OrthonormalBasis::new(m).unwrap()
}

#[test]
fn point_to_linear_subspace_hand_cases() {
    // distance from (3, 4, 0) to the x-axis is 4
    let l = Subspace::linear(axis(3, 0));
    assert_eq!(dist2_point_to_subspace(&vec3(3.0, 4.0, 0.0), &l), 16.0);
    // a point on the subspace is at distance 0
    assert_eq!(dist2_point_to_subspace(&vec3(-7.0, 0.0, 0.0), &l), 0.0);
}

#[test]
fn point_to_affine_subspace_hand_case() {
    // line { (t, 1, 0) } : distance from (5, 3, 0) is 2
    let l = Subspace::affine(axis(3, 0), vec3(0.0, 1.0, 0.0)).unwrap();
    let d2 = dist2_point_to_subspace(&vec3(5.0, 3.0, 0.0), &l);
    assert!((d2 - 4.0).abs() < 1e-12);
}

#[test]
fn union_takes_the_minimum() {
    let c = ClosedSet::new(vec![
        Subspace::linear(axis(3, 0)),
        Subspace::linear(axis(3, 1)),
    ])
    .unwrap();
    // (1, 2, 0): 4 off the x-axis, 1 off the y-axis
    assert_eq!(dist2_point_to_closedset(&vec3(1.0, 2.0, 0.0), &c), 1.0);
}

#[test]
fn point_distance_matches_reconstruction_oracle() {
    // Pythagorean short form against the explicit |p - X X^T p|^2 residual
    for seed in 0..50u64 {
        let basis = orthonormalize(&random_dense(8, 3, seed).to_dense());
        let p_mat = random_dense(8, 1, seed + 500).to_dense();
        let p = DVector::from_column_slice(p_mat.as_slice());
        let x = basis.columns();
        let resid = &p - x * (x.transpose() * &p);
        let linear = Subspace::linear(basis.clone());
        assert!((dist2_point_to_subspace(&p, &linear) - resid.norm_squared()).abs() < 1e-10);

        let o_mat = random_dense(8, 1, seed + 900).to_dense();
        let o = DVector::from_column_slice(o_mat.as_slice());
        let shifted = &p - &o;
        let resid_a = &shifted - x * (x.transpose() * &shifted);
        let affine = Subspace::affine(basis, o).unwrap();
        assert!((dist2_point_to_subspace(&p, &affine) - resid_a.norm_squared()).abs() < 1e-10);
    }
}

#[test]
fn matrix_distance_sums_row_distances() {
    let a = random_dense(10, 5, 3);
    let c = random_closed_set(5, 2, 2, true, 1.0, 17);
    let total = dist2_matrix_to_closedset(&a, &c).unwrap();
    let dense = a.to_dense();
    let mut by_rows = 0.0;
    for i in 0..10 {
        let p = DVector::from_iterator(5, (0..5).map(|j| dense[(i, j)]));
        by_rows += dist2_point_to_closedset(&p, &c);
    }
    assert!((total - by_rows).abs() < 1e-12 * (1.0 + by_rows));
}

#[test]
fn matrix_distance_dimension_check() {
    let a = random_dense(4, 6, 0);
    let c = random_closed_set(5, 1, 1, false, 0.0, 0);
    assert!(dist2_matrix_to_closedset(&a, &c).is_err());
}

#[test]
fn coordinate_evaluation_matches_ambient_evaluation() {
    // Evaluating distances on m-dimensional coefficients against a reducer
    // must equal evaluating the reconstructed rows in ambient space.
    let a = random_dense(12, 7, 21);
    let reducer = orthonormalize(&random_dense(7, 4, 22).to_dense());
    let projected = project_rows(&a, &reducer).unwrap();
    let reconstructed =
        DataMatrix::from_dense(&projected * reducer.columns().transpose()).unwrap();
    for seed in 0..10u64 {
        let affine = seed % 2 == 1;
        let c = random_closed_set(7, 2, 2, affine, 0.7, derive_seed(33, seed));
        let fast = c.dist2_in_coordinates(&projected, reducer.columns());
        let slow = dist2_matrix_to_closedset(&reconstructed, &c).unwrap();
        assert!(
            (fast - slow).abs() < 1e-8 * (1.0 + slow),
            "seed {seed}: {fast} vs {slow}"
        );
    }
}

#[test]
fn random_closed_set_is_reproducible() {
    let c1 = random_closed_set(6, 3, 2, true, 0.5, 42);
    let c2 = random_closed_set(6, 3, 2, true, 0.5, 42);
    assert_eq!(c1, c2);
    let c3 = random_closed_set(6, 3, 2, true, 0.5, 43);
    assert_ne!(c1, c3);
    assert_eq!(c1.k(), 3);
    assert_eq!(c1.max_dim(), 2);
    assert!(c1.is_affine());
    assert!(!random_closed_set(6, 3, 2, false, 0.0, 42).is_affine());
}

#[test]
fn weak_triangle_holds_on_random_draws() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..500 {
        let d = 6;
        let affine = trial % 2 == 0;
        let c = random_closed_set(d, 2, 2, affine, 1.0, 9000 + trial);
        let mut draw = |scale: f64| {
            DVector::from_iterator(d, (0..d).map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                scale * g
            }))
        };
        let p = draw(1.0);
        let q = &p + draw(0.3);
        let eps = 0.05 + 0.9 * rng.random::<f64>();
        let wt = check_weak_triangle(&p, &q, &c, eps);
        assert!(wt.holds, "trial {trial}: lhs {} rhs {}", wt.lhs, wt.rhs);
    }
}

#[test]
fn weak_triangle_identical_points() {
    let c = random_closed_set(4, 1, 1, false, 0.0, 3);
    let p = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    let wt = check_weak_triangle(&p, &p, &c, 0.5);
    assert_eq!(wt.lhs, 0.0);
    assert!(wt.holds);
}

#[test]
fn closed_set_validation() {
    assert!(ClosedSet::new(vec![]).is_err());
    let mixed = vec![
        Subspace::linear(axis(3, 0)),
        Subspace::linear(axis(4, 0)),
    ];
    assert!(ClosedSet::new(mixed).is_err());
    // offset dimension mismatch
    assert!(Subspace::affine(axis(3, 0), DVector::from_vec(vec![1.0, 2.0])).is_err());
    assert!(Subspace::affine(axis(2, 0), DVector::from_vec(vec![f64::NAN, 0.0])).is_err());
}

#[test]
fn text_round_trip_is_exact() {
    for seed in 0..8u64 {
        let c = random_closed_set(5, 2, 2, seed % 2 == 0, 1.3, seed);
        let text = closedset_to_text(&c);
        let back = closedset_from_text(&text).unwrap();
        assert_eq!(back, c, "seed {seed}");
    }
}

#[test]
fn text_parse_errors_name_the_line() {
    let err = closedset_from_text("garbage\n").unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");

    let c = random_closed_set(3, 1, 1, false, 0.0, 1);
    let good = closedset_to_text(&c);
    // corrupt the basis line (line 3)
    let bad = good.replace("basis ", "basis nope ");
    let err = closedset_from_text(&bad).unwrap_err();
    assert!(err.to_string().contains("line 3"), "{err}");

    // truncate: drop the basis line entirely
    let truncated: String = good.lines().take(2).map(|l| format!("{l}\n")).collect();
    assert!(closedset_from_text(&truncated).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distances_are_nonnegative(seed in 0u64..500, affine in proptest::bool::ANY) {
        let c = random_closed_set(5, 2, 2, affine, 1.0, seed);
        let p_mat = random_dense(5, 1, seed + 1).to_dense();
        let p = DVector::from_column_slice(p_mat.as_slice());
        prop_assert!(dist2_point_to_closedset(&p, &c) >= 0.0);
    }

    #[test]
    fn adding_a_subspace_never_increases_distance(seed in 0u64..500) {
        let c1 = random_closed_set(5, 1, 2, false, 0.0, seed);
        let c2 = random_closed_set(5, 1, 2, false, 0.0, seed + 77);
        let both = ClosedSet::new(
            c1.subspaces.iter().chain(&c2.subspaces).cloned().collect(),
        ).unwrap();
        let p_mat = random_dense(5, 1, seed + 3).to_dense();
        let p = DVector::from_column_slice(p_mat.as_slice());
        let d_both = dist2_point_to_closedset(&p, &both);
        prop_assert!(d_both <= dist2_point_to_closedset(&p, &c1) + 1e-12);
        prop_assert!(d_both <= dist2_point_to_closedset(&p, &c2) + 1e-12);
    }
}
