use haarint::haar::{sample_unitary, RngStream};
use haarint::matrix::{
    coupling_det, det_realified, hermitian_eigen, kron, log_det_one_minus_gram, singular_values, svd, ComplexMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(n: usize, entries: Vec<(f64, f64)>) -> ComplexMatrix {
    ComplexMatrix::from_row_major(n, n, entries.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
}

fn square(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |e| matrix(n, e))
}

/// A matrix rescaled so that its largest singular value is `radius`.
fn ball(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    (square(n), 0.01..0.97f64).prop_filter_map("nonzero", |(m, radius)| {
        let s = m.sigma_max().ok()?;
        (s > 1e-3).then(|| m.scale(radius / s))
    })
}

fn unitary(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    any::<u64>().prop_map(move |seed| sample_unitary(n, &mut RngStream::new(seed, 0).rng()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn realified_det_is_squared_modulus(x in square(3)) {
        let expect = x.determinant().unwrap().norm_sqr();
        prop_assume!(expect > 1e-6);
        let got = det_realified(&x).unwrap();
        prop_assert!((got - expect).abs() <= 1e-10 * expect);
    }

    #[test]
    fn coupling_det_is_symmetric(a in ball(2), d in ball(3)) {
        let ad = coupling_det(&a, &d).unwrap();
        let da = coupling_det(&d, &a).unwrap();
        prop_assert!((ad - da).abs() <= 1e-12);
        prop_assert!(ad > 0.0 && ad <= 1.0);
    }

    #[test]
    fn coupling_det_matches_kronecker(a in ball(2), d in ball(3)) {
        let explicit = (&ComplexMatrix::identity(6) - &kron(&a.gram(), &d.gram())).determinant().unwrap();
        let got = coupling_det(&a, &d).unwrap();
        prop_assert!((got - explicit.re).abs() <= 1e-10 * explicit.re);
    }

    #[test]
    fn coupling_det_is_unitarily_invariant(a in ball(2), d in ball(2), vl in unitary(2), vr in unitary(2), wl in unitary(2), wr in unitary(2)) {
        let before = coupling_det(&a, &d).unwrap();
        let after = coupling_det(&(&(&vl * &a) * &vr), &(&(&wl * &d) * &wr)).unwrap();
        prop_assert!((before - after).abs() <= 1e-12);
    }

    #[test]
    fn log_det_is_linear_in_power(a in ball(3), p1 in 0.0..40.0f64, p2 in 0.0..40.0f64) {
        let sum = log_det_one_minus_gram(&a, p1 + p2).unwrap().log_magnitude();
        let parts = log_det_one_minus_gram(&a, p1).unwrap().log_magnitude()
            + log_det_one_minus_gram(&a, p2).unwrap().log_magnitude();
        prop_assert!((sum - parts).abs() <= 1e-10 * (1.0 + sum.abs()));
    }

    #[test]
    fn svd_reassembles(x in square(4)) {
        let s = svd(&x).unwrap();
        let back = &(&s.u * &ComplexMatrix::from_real_diagonal(&s.singular_values)) * &s.v_adjoint;
        prop_assert!((&back - &x).max_abs() <= 1e-10);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn hermitian_eigenvalues_ascend(x in square(4)) {
        let h = &x + &x.adjoint();
        let e = hermitian_eigen(&h).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = &(&e.vectors * &ComplexMatrix::from_real_diagonal(&e.values)) * &e.vectors.adjoint();
        prop_assert!((&back - &h).max_abs() <= 1e-10);
    }
}

#[test]
fn boundary_points_are_rejected() {
    let edge = ComplexMatrix::scaled_identity(2, 1.0);
    assert!(log_det_one_minus_gram(&edge, 1.0).is_err());
    let almost = ComplexMatrix::scaled_identity(2, 1.0 - 1e-15);
    assert!(!almost.in_ball());
    assert!(ComplexMatrix::scaled_identity(2, 0.999).in_ball());
}

#[test]
fn unitary_singular_values_are_one() {
    let u = sample_unitary(6, &mut RngStream::new(17, 0).rng()).unwrap();
    for s in singular_values(&u).unwrap() {
        assert!((s - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn serde_round_trip() {
    let m = matrix(2, vec![(1.0, -2.0), (0.5, 0.0), (0.0, 3.25), (-1.0, 1.0)]);
    let s = serde_json::to_string(&m).unwrap();
    let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
    assert_eq!(back, m);
}
