use haarint::asymptotics::{
    factorized_expectation, gaussian_expectation, weingarten_leading, FactorMode, HomogeneousIntegrand, PairingPattern,
};
use haarint::error::Error;
use haarint::mc::{integrate_single, moment_monomial, IntegrandSpec, McOptions, ShiftMode};
use haarint::matrix::ComplexMatrix;
use haarint::saddle::linear_saddle;
use num_complex::Complex64;
use proptest::prelude::*;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pattern(i: &[usize], j: &[usize], k: &[usize], l: &[usize]) -> PairingPattern {
    PairingPattern::new(i.to_vec(), j.to_vec(), k.to_vec(), l.to_vec()).unwrap()
}

#[test]
fn single_factor() {
    assert_eq!(weingarten_leading(&pattern(&[1], &[1], &[1], &[1]), 10).unwrap(), 0.1);
    assert_eq!(weingarten_leading(&pattern(&[1], &[2], &[1], &[1]), 10).unwrap(), 0.0);
}

#[test]
fn two_factors() {
    let n = 7.0;
    let distinct = pattern(&[1, 2], &[1, 2], &[1, 2], &[1, 2]);
    assert_eq!(weingarten_leading(&distinct, 7).unwrap(), 1.0 / (n * n));
    let same = pattern(&[1, 1], &[1, 1], &[1, 1], &[1, 1]);
    assert_eq!(weingarten_leading(&same, 7).unwrap(), 2.0 / (n * n));
}

#[test]
fn pattern_errors() {
    let big = vec![1; 9];
    assert!(matches!(
        PairingPattern::new(big.clone(), big.clone(), big.clone(), big),
        Err(Error::EnumerationCap { .. })
    ));
    assert!(PairingPattern::new(vec![1], vec![1, 2], vec![1], vec![1]).is_err());
    assert!(weingarten_leading(&pattern(&[5], &[1], &[1], &[5]), 4).is_err());
}

#[test]
fn pairing_formula_against_sampling() {
    // E|U_11|^2 |U_22|^2 at N = 64.
    let n = 64usize;
    let p = pattern(&[1, 2], &[1, 2], &[1, 2], &[1, 2]);
    let lead = weingarten_leading(&p, n).unwrap();
    let mc = moment_monomial(&p.to_monomial(), n, &McOptions::new(1_000_000, 77)).unwrap();
    let gap = (mc.mean.re - lead).abs();
    assert!(gap <= (4.0 * mc.std_error).max(5.0 / (n as f64).powi(3)), "{gap} vs {}", mc.std_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relabeling_factors_leaves_the_count_unchanged(
        idx in prop::collection::vec((1usize..=3, 1usize..=3), 1..=4),
        shift in 0usize..4,
        rot in 0usize..4,
    ) {
        let p = idx.len();
        let i: Vec<usize> = idx.iter().map(|x| x.0).collect();
        let j: Vec<usize> = idx.iter().map(|x| x.1).collect();
        // Conjugate factors are a cyclic shift of the plain ones, so at least
        // one pairing exists.
        let l: Vec<usize> = (0..p).map(|m| i[(m + shift) % p]).collect();
        let k: Vec<usize> = (0..p).map(|m| j[(m + shift) % p]).collect();
        let base = pattern(&i, &j, &k, &l);
        prop_assert!(base.pairing_count() >= 1);
        let r = |v: &Vec<usize>| -> Vec<usize> { (0..p).map(|m| v[(m + rot) % p]).collect() };
        let rotated = pattern(&r(&i), &r(&j), &k, &l);
        prop_assert_eq!(base.pairing_count(), rotated.pairing_count());
        // Swapping the roles of rows and columns on both sides.
        let transposed = pattern(&j, &i, &l, &k);
        prop_assert_eq!(base.pairing_count(), transposed.pairing_count());
    }
}

#[test]
fn gaussian_moments() {
    let opts = McOptions::new(200_000, 8);
    let one = gaussian_expectation(&HomogeneousIntegrand::real(0, |_| 1.0), 2, &opts).unwrap();
    assert!((one.mean.re - 1.0).abs() < 1e-14);
    let second = gaussian_expectation(&HomogeneousIntegrand::real(2, |a| a.get(0, 0).norm_sqr()), 1, &opts).unwrap();
    assert!(second.within_sigma(real(1.0), 4.0), "{second:?}");
    let fourth = gaussian_expectation(&HomogeneousIntegrand::real(4, |a| a.get(0, 0).norm_sqr().powi(2)), 1, &opts).unwrap();
    assert!(fourth.within_sigma(real(2.0), 4.0), "{fourth:?}");
}

#[test]
fn homogeneity_is_checked() {
    let wrong = HomogeneousIntegrand::real(3, |a| a.get(0, 0).norm_sqr());
    assert!(matches!(
        gaussian_expectation(&wrong, 1, &McOptions::new(100, 0)),
        Err(Error::HomogeneityViolation { .. })
    ));
}

fn block_pair_mc(f: impl Fn(Complex64, Complex64) -> f64 + Send + Sync + 'static, n: usize, opts: &McOptions) -> haarint::McEstimate {
    let spec = IntegrandSpec::real_callback(move |b| f(b.get(0, 0), b.get(1, 1)));
    integrate_single(&spec, n, 2, opts).unwrap()
}

#[test]
fn product_mode_for_a_constant_factor() {
    let n = 32;
    let g = HomogeneousIntegrand::real(2, |d| d.get(0, 0).norm_sqr());
    let fx = factorized_expectation(&IntegrandSpec::Constant(1.0), &g, n, 1, 1, FactorMode::Product, &McOptions::new(200_000, 3)).unwrap();
    let full = block_pair_mc(|_, d| d.norm_sqr(), n, &McOptions::new(200_000, 4));
    assert!(fx.std_error > 0.0);
    assert!((fx.mean.re - 1.0 / n as f64).abs() <= 4.0 * fx.std_error);
    assert!((fx.mean - full.mean).norm() <= 4.0 * fx.std_error.hypot(full.std_error));
}

#[test]
fn product_mode_with_an_exponential_factor() {
    let n = 64usize;
    let y = 0.5;
    let f = IntegrandSpec::ExpLinear { y: ComplexMatrix::scaled_identity(1, y), scale: n as f64 };
    let g = HomogeneousIntegrand::real(2, |d| d.get(0, 0).norm_sqr());
    let opts = McOptions::new(400_000, 12).with_shift(ShiftMode::Auto);
    let fx = factorized_expectation(&f, &g, n, 1, 1, FactorMode::Product, &opts).unwrap();
    let saddle = linear_saddle(&ComplexMatrix::scaled_identity(1, y), n).unwrap().log_asymptotic_value.unwrap();
    let saddle_route = saddle.to_f64() / n as f64;
    let product = fx.log_mean().to_f64();
    let rel_se = fx.std_error / fx.mean.norm();
    // The saddle route carries its own 1 + O(1/N) correction.
    assert!((product / saddle_route - 1.0).abs() <= 4.0 * rel_se + 2.0 / n as f64, "{product} vs {saddle_route}");

    let nf = n as f64;
    let full = block_pair_mc(move |a, d| (nf * y * a.re).exp() * d.norm_sqr(), n, &opts);
    let full_value = full.log_mean().to_f64();
    let full_rel = full.std_error / full.mean.norm();
    assert!(
        (product / full_value - 1.0).abs() <= 4.0 * rel_se.hypot(full_rel) + 2.0 / nf,
        "{product} vs {full_value}"
    );
}

#[test]
fn coupled_mode_reweights_toward_the_joint_law() {
    let n = 24;
    let g = HomogeneousIntegrand::real(2, |d| d.get(0, 0).norm_sqr());
    let f = IntegrandSpec::real_callback(|a| a.get(0, 0).norm_sqr());
    let opts = McOptions::new(200_000, 21);
    let coupled = factorized_expectation(&f, &g, n, 1, 1, FactorMode::Coupled, &opts).unwrap();
    let rew = coupled.reweighting.unwrap();
    assert!(rew.mean.re > 1.0);
    // The exact joint moment E|U_11|^2|U_22|^2 = 1/(N^2 - 1).
    let exact = 1.0 / ((n * n) as f64 - 1.0);
    let value = coupled.log_mean().to_f64();
    assert!((value / exact - 1.0).abs() < 0.1, "{value} vs {exact}");
    assert!(factorized_expectation(&f, &g, 3, 1, 1, FactorMode::Coupled, &opts).is_err());
}
