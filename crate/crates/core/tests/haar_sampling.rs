use haarint::haar::{block, sample_ball_uniform, sample_isometry, sample_unitary, BlockSpec, HaarSampler, RngStream};
use haarint::matrix::{log_det_one_minus_gram, ComplexMatrix};
use haarint::reduction::{detpower_integral_q2, normalization_constant};
use num_complex::Complex64;

fn running_mean(samples: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = samples.collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn samples_are_unitary() {
    let mut s = HaarSampler::new(12, RngStream::new(3, 0)).unwrap();
    for _ in 0..50 {
        assert!(s.unitary().unitarity_residual() <= 1e-12);
    }
    let v = s.isometry(5).unwrap();
    assert!((&v.gram() - &ComplexMatrix::identity(5)).max_abs() <= 1e-12);
}

#[test]
fn identical_streams_give_identical_draws() {
    let a = sample_unitary(7, &mut RngStream::new(11, 4).rng()).unwrap();
    let b = sample_unitary(7, &mut RngStream::new(11, 4).rng()).unwrap();
    let c = sample_unitary(7, &mut RngStream::new(11, 5).rng()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn isometry_is_a_prefix_of_the_unitary() {
    let u = sample_unitary(6, &mut RngStream::new(8, 0).rng()).unwrap();
    let v = sample_isometry(6, 2, &mut RngStream::new(8, 0).rng()).unwrap();
    assert!((&u.submatrix(0, 0, 6, 2) - &v).max_abs() <= 1e-13);
}

#[test]
fn entry_second_moment_is_one_over_n() {
    let mut rng = RngStream::new(2024, 0).rng();
    let (mean, se) = running_mean((0..40_000).map(|_| sample_unitary(8, &mut rng).unwrap().get(0, 0).norm_sqr()));
    assert!((mean - 0.125).abs() <= 4.0 * se, "{mean} +- {se}");
}

#[test]
fn off_diagonal_entries_have_zero_mean() {
    let mut rng = RngStream::new(5, 1).rng();
    let draws: Vec<Complex64> = (0..40_000).map(|_| sample_unitary(4, &mut rng).unwrap().get(0, 1)).collect();
    let (re, se_re) = running_mean(draws.iter().map(|z| z.re));
    let (im, se_im) = running_mean(draws.iter().map(|z| z.im));
    assert!(re.abs() <= 4.0 * se_re && im.abs() <= 4.0 * se_im);
}

#[test]
fn distribution_is_left_and_right_invariant() {
    // E|(V U W)_11|^4 = 2/(N(N+1)) for fixed unitaries V, W.
    let fixed = RngStream::new(99, 0);
    let v = sample_unitary(5, &mut fixed.rng()).unwrap();
    let w = sample_unitary(5, &mut fixed.with_stream_id(1).rng()).unwrap();
    let mut rng = RngStream::new(100, 0).rng();
    let (mean, se) = running_mean((0..40_000).map(|_| {
        let u = sample_unitary(5, &mut rng).unwrap();
        (&(&v * &u) * &w).get(0, 0).norm_sqr().powi(2)
    }));
    let exact = 2.0 / 30.0;
    assert!((mean - exact).abs() <= 4.0 * se, "{mean} +- {se}");
}

#[test]
fn block_extraction() {
    let u = sample_unitary(6, &mut RngStream::new(1, 0).rng()).unwrap();
    let b = block(&u, BlockSpec::pair(2, 3)).unwrap();
    assert_eq!(b.a, u.submatrix(0, 0, 2, 2));
    let d = b.d.unwrap();
    assert_eq!(d, u.submatrix(2, 2, 3, 3));
    assert!(block(&u, BlockSpec::pair(3, 4)).is_err());
}

#[test]
fn block_density_matches_reduction() {
    // E det(1 - A*A)^k for the 2x2 block of U(16) equals K(N + k, 2) / K(N, 2).
    let n = 16;
    let k = 3.0;
    let mut rng = RngStream::new(31, 0).rng();
    let (mean, se) = running_mean((0..40_000).map(|_| {
        let a = sample_isometry(n, 2, &mut rng).unwrap().submatrix(0, 0, 2, 2);
        log_det_one_minus_gram(&a, k).unwrap().to_f64()
    }));
    let exact = (normalization_constant(n + 3, 2).unwrap().value / normalization_constant(n, 2).unwrap().value).to_f64();
    assert!((mean - exact).abs() <= 4.0 * se, "{mean} vs {exact} +- {se}");
    let quad = detpower_integral_q2(n + 3, 1e-6).unwrap().value / normalization_constant(n, 2).unwrap().value.to_f64();
    assert!((quad - exact).abs() <= 1e-5 * exact);
}

#[test]
fn ball_sampler_stays_inside() {
    let mut rng = RngStream::new(6, 0).rng();
    for q in 1..=3 {
        for _ in 0..200 {
            assert!(sample_ball_uniform(q, &mut rng).unwrap().in_ball());
        }
    }
}

#[test]
fn dimension_errors() {
    let mut rng = RngStream::new(0, 0).rng();
    assert!(sample_unitary(0, &mut rng).is_err());
    assert!(sample_isometry(3, 4, &mut rng).is_err());
    assert!(BlockSpec::single(5).validate(4).is_err());
}
