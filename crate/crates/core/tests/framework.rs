mod common;

use bearing_rigidity::framework::{bearing, distance_rank_target, numerical_rank};
use bearing_rigidity::{Error, Framework, FrameworkFile, Graph, DEFAULT_TOL};
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

#[test]
fn jacobian_matches_finite_differences() {
    for f in mixed_frameworks(11, 30) {
        let r = f.bearing_rigidity_matrix();
        let x0 = f.stacked_positions();
        let d = f.dim();
        let h = 1e-6;
        let mut fd = DMatrix::zeros(r.nrows(), r.ncols());
        for c in 0..x0.len() {
            let shifted = |s: f64| {
                let mut x = x0.clone();
                x[c] += s;
                let pos = (0..f.vertex_count()).map(|i| x.rows(i * d, d).into_owned()).collect();
                Framework::new(f.graph().clone(), d, pos).unwrap().bearing_function()
            };
            fd.set_column(c, &((shifted(h) - shifted(-h)) / (2.0 * h)));
        }
        let scale = r.amax();
        assert!((&fd - &r).amax() <= 1e-5 * scale, "jacobian mismatch {}", (&fd - &r).amax());
    }
}

#[test]
fn trivial_motions_lie_in_the_kernel() {
    for f in mixed_frameworks(12, 60) {
        let t = f.trivial_motion_basis();
        assert_eq!(t.ncols(), f.dim() + 1);
        assert!((t.transpose() * &t - DMatrix::identity(t.ncols(), t.ncols())).amax() < 1e-12);
        assert!((f.bearing_rigidity_matrix() * &t).amax() <= 1e-10);
    }
}

#[test]
fn rank_test_agrees_with_elimination_oracle() {
    let mut rigid = 0;
    let frameworks = mixed_frameworks(13, 200);
    for f in &frameworks {
        let r = f.bearing_rigidity_matrix();
        let target = f.dim() * f.vertex_count() - f.dim() - 1;
        let oracle = elimination_rank(&r, 1e-9) == target;
        assert_eq!(f.is_ibr_rank(DEFAULT_TOL), oracle);
        rigid += oracle as usize;
    }
    assert!(rigid > 20 && rigid < frameworks.len() - 20, "sample not mixed: {rigid}");
}

#[test]
fn idr_examples_against_oracle() {
    let k3 = Framework::from_rows(Graph::complete(3), &[&[0.0, 0.0], &[1.0, 0.1], &[0.3, 0.9]]).unwrap();
    assert_eq!(elimination_rank(&k3.distance_rigidity_matrix(), 1e-9), 3);
    assert!(k3.is_idr(DEFAULT_TOL).unwrap());

    let square = Framework::from_rows(Graph::cycle(4), &[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]).unwrap();
    assert_eq!(elimination_rank(&square.distance_rigidity_matrix(), 1e-9), 4);
    assert!(!square.is_idr(DEFAULT_TOL).unwrap());

    let k4 = Framework::from_rows(
        Graph::complete(4),
        &[&[0.0, 0.0, 0.0], &[1.0, 0.1, 0.0], &[0.2, 0.9, 0.1], &[0.3, 0.2, 1.1]],
    )
    .unwrap();
    assert_eq!(elimination_rank(&k4.distance_rigidity_matrix(), 1e-9), 6);
    assert_eq!(distance_rank_target(4, 3), 6);
    assert!(k4.is_idr(DEFAULT_TOL).unwrap());
}

#[test]
fn bearing_examples() {
    let b = bearing(&DVector::from_vec(vec![0.0, 0.0]), &DVector::from_vec(vec![3.0, 4.0])).unwrap();
    assert_eq!(b.as_slice(), &[0.6, 0.8]);
    let same = DVector::from_vec(vec![1.0, 1.0]);
    assert!(matches!(bearing(&same, &same), Err(Error::DegenerateRealization(_))));
}

#[test]
fn rank_of_zero_matrix() {
    assert_eq!(numerical_rank(&DMatrix::zeros(3, 3), DEFAULT_TOL), 0);
}

#[test]
fn framework_json_interface() {
    let text = r#"{"dim":2,"positions":[[0,0],[1,0],[0,1]],"edges":[[0,1],[1,2],[0,2]]}"#;
    let f: Framework = serde_json::from_str(text).unwrap();
    assert!(f.is_ibr_rank(DEFAULT_TOL));
    let file = FrameworkFile::from(&f);
    assert_eq!(file.edges, vec![[0, 1], [0, 2], [1, 2]]);

    for bad in [
        r#"{"dim":2,"positions":[[0,0],[0,0]],"edges":[[0,1]]}"#,
        r#"{"dim":2,"positions":[[0,0],[1,0]],"edges":[[0,2]]}"#,
        r#"{"dim":2,"positions":[[0,0],[1,0,3]],"edges":[]}"#,
        r#"{"dim":2,"positions":[[0,0],[1,0]],"edges":[[1,1]]}"#,
    ] {
        assert!(serde_json::from_str::<Framework>(bad).is_err(), "{bad}");
    }
}

fn arb_framework() -> impl Strategy<Value = Framework> {
    (2usize..4, 3usize..8, any::<u64>()).prop_map(|(dim, n, seed)| random_framework(&mut rng(seed), n, dim, 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bearing_is_antisymmetric(a in prop::collection::vec(-10.0f64..10.0, 3), b in prop::collection::vec(-10.0f64..10.0, 3)) {
        let (pa, pb) = (DVector::from_vec(a), DVector::from_vec(b));
        prop_assume!((&pa - &pb).norm() > 1e-6);
        prop_assert_eq!(bearing(&pa, &pb).unwrap(), -bearing(&pb, &pa).unwrap());
    }

    #[test]
    fn ibr_invariant_under_translation_and_scaling(
        f in arb_framework(),
        shift in prop::collection::vec(-5.0f64..5.0, 3),
        scale in 0.1f64..10.0,
    ) {
        let d = f.dim();
        let t = DVector::from_column_slice(&shift[..d]);
        let moved = f.map_positions(|p| p * scale + &t).unwrap();
        prop_assert_eq!(f.is_ibr_rank(DEFAULT_TOL), moved.is_ibr_rank(DEFAULT_TOL));
    }

    #[test]
    fn json_round_trip(f in arb_framework()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: Framework = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}
