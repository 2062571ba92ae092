use haarint::error::Error;
use haarint::haar::RngStream;
use haarint::matrix::ComplexMatrix;
use haarint::mc::{
    integrate_double, integrate_single, moment_monomial, BlockSampling, IntegrandSpec, McOptions, MonomialPattern,
    ShiftMode,
};
use haarint::quadrature::QuadOptions;
use haarint::reduction::quartic_integral_q1;
use num_complex::Complex64;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn abs_square_moment() {
    let e = moment_monomial(&MonomialPattern::abs_sq(1, 1), 10, &McOptions::new(100_000, 7)).unwrap();
    assert!(e.within_sigma(real(0.1), 4.0), "{e:?}");
}

#[test]
fn fourth_moment_of_one_entry() {
    // E|U_11|^4 = 2/(N(N+1)).
    let p = MonomialPattern::new(vec![(1, 1), (1, 1)], vec![(1, 1), (1, 1)]);
    let e = moment_monomial(&p, 6, &McOptions::new(200_000, 1)).unwrap();
    assert!(e.within_sigma(real(2.0 / 42.0), 4.0), "{e:?}");
}

#[test]
fn unbalanced_moment_is_exactly_zero() {
    let p = MonomialPattern::new(vec![(1, 1)], vec![(1, 2)]);
    let e = moment_monomial(&p, 4, &McOptions::new(1000, 1)).unwrap();
    assert_eq!(e.mean, real(0.0));
    assert_eq!(e.n_samples, 0);
}

#[test]
fn quartic_double_integral_matches_quadrature() {
    let quad = quartic_integral_q1(1.0, 6, &QuadOptions::relative(1e-10)).unwrap().value.to_f64();
    assert!((quad - 1.22381).abs() < 1e-4, "{quad}");
    let e = integrate_double(&IntegrandSpec::exp_quartic(1.0, 6), 6, 1, &McOptions::new(1_000_000, 42)).unwrap();
    assert!(e.within_sigma(real(quad), 4.0), "{e:?} vs {quad}");
}

#[test]
fn shifted_ball_sampling_reaches_the_saddle_region() {
    let quad = quartic_integral_q1(6.0, 20, &QuadOptions::relative(1e-10)).unwrap().value;
    assert!((quad.to_f64() / 7.743e8 - 1.0).abs() < 1e-3);
    let opts = McOptions::new(1_000_000, 9).with_shift(ShiftMode::Auto).with_sampling(BlockSampling::Ball);
    let e = integrate_double(&IntegrandSpec::exp_quartic(6.0, 20), 20, 1, &opts).unwrap();
    let reference = (quad / haarint::LogValue::from_log(e.shift)).to_f64();
    assert!(e.within_sigma(real(reference), 4.0), "{e:?} vs {reference}");
}

#[test]
fn overflow_without_shift_suggests_one() {
    let err = integrate_single(&IntegrandSpec::exp_quartic(1000.0, 1000), 1000, 1, &McOptions::new(64, 3).with_sampling(BlockSampling::Ball))
        .unwrap_err();
    match err {
        Error::ExponentOverflow { suggested_shift, .. } => assert!(suggested_shift > 709.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn result_is_independent_of_thread_count() {
    let f = IntegrandSpec::ExpLinear { y: ComplexMatrix::scaled_identity(2, 0.7), scale: 8.0 };
    let opts = McOptions::new(50_000, 123).with_shift(ShiftMode::Auto);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| integrate_single(&f, 8, 2, &opts).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn standard_error_shrinks_with_sample_count() {
    let f = IntegrandSpec::DetPower { power: 2.0 };
    let small = integrate_single(&f, 9, 2, &McOptions::new(40_000, 5)).unwrap();
    let large = integrate_single(&f, 9, 2, &McOptions::new(160_000, 5)).unwrap();
    let ratio = small.std_error / large.std_error;
    assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
}

#[test]
fn seeds_agree_within_error() {
    let f = IntegrandSpec::DetPower { power: 1.0 };
    let a = integrate_single(&f, 8, 1, &McOptions::new(100_000, 1)).unwrap();
    let b = integrate_single(&f, 8, 1, &McOptions::new(100_000, 2)).unwrap();
    assert_ne!(a.mean, b.mean);
    let gap = (a.mean - b.mean).norm();
    assert!(gap <= 4.0 * (a.std_error.hypot(b.std_error)));
    // E (1 - |a|^2) = 1 - 1/N.
    assert!(a.within_sigma(real(7.0 / 8.0), 4.0));
}

#[test]
fn callbacks_and_streams() {
    let f = IntegrandSpec::real_callback(|a| a.get(0, 0).norm_sqr());
    let opts = McOptions::new(20_000, 4).with_stream(RngStream::new(4, 17));
    let e = integrate_single(&f, 5, 1, &opts).unwrap();
    assert_eq!(e.seed, RngStream::new(4, 17));
    assert!(e.within_sigma(real(0.2), 4.0));
}

#[test]
fn invalid_inputs() {
    let f = IntegrandSpec::Constant(1.0);
    assert!(integrate_single(&f, 3, 4, &McOptions::new(10, 0)).is_err());
    assert!(integrate_single(&IntegrandSpec::DetPower { power: 1.0 }, 3, 1, &McOptions::new(1, 0)).is_err());
    assert!(integrate_single(&f, 3, 2, &McOptions::new(10, 0).with_sampling(BlockSampling::Ball)).is_err());
}
