//! Named validation scenarios. Each runs several routes for the same
//! quantities and gates their agreement.

use std::f64::consts::{E, LN_2, PI};

use haarint::asymptotics::{random_hermitian, PairingPattern};
use haarint::haar::{gaussian_matrix, RngStream};
use haarint::matrix::{coupling_det, det_realified, kron, ComplexMatrix};
use haarint::mc::{integrate_double, BlockSampling, IntegrandSpec, McOptions, ShiftMode};
use haarint::quadrature::QuadOptions;
use haarint::reduction::{
    detpower_integral_q2, leading_reduced_integral, normalization_constant, quartic_integral_q1, reduced_integral_q1,
    DiscIntegrand, Normalization,
};
use haarint::saddle::{
    exp_linear_example, g_quartic, h_of_q, h_weighted_slope, linear_maximizer_residual, linear_saddle, quartic_saddle,
    quartic_threshold, QuarticConfig, H_PRIME_AT_Q_MIN,
};
use haarint::LogValue;
use rand::Rng;

use crate::commands::{moment_report, rel_gap, seeded, sweep_h};
use crate::error::{CliError, CliResult};
use crate::report::{CompareReport, Gate, Row, SuiteReport, Uncertainty};

pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Overrides every Monte Carlo sample count in the suite.
    pub samples: Option<u64>,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        SuiteOptions { seed, samples: None }
    }

    fn samples(&self, default: u64) -> u64 {
        self.samples.unwrap_or(default)
    }
}

pub struct Suite {
    pub name: &'static str,
    pub description: &'static str,
    run: fn(&SuiteOptions) -> CliResult<Vec<CompareReport>>,
}

pub const SUITES: &[Suite] = &[
    Suite { name: "normalization", description: "K(N,2): closed form, factorial route and 4D quadrature", run: normalization },
    Suite { name: "moments", description: "entry moments: sampling against the pairing formula", run: moments },
    Suite { name: "q1-exponential", description: "exponential disc integrand: series, quadrature, geometric limit", run: q1_exponential },
    Suite { name: "linear-saddle", description: "linear saddle against disc quadrature", run: linear_saddle_suite },
    Suite { name: "quartic-saddle", description: "quartic saddle against 2D quadrature and shifted sampling", run: quartic_saddle_suite },
    Suite { name: "quartic-threshold", description: "positivity threshold of the quartic exponent", run: quartic_threshold_suite },
    Suite { name: "h-function", description: "h(q): endpoint slope, monotonicity, frozen-c maximum", run: h_function },
    Suite { name: "determinants", description: "realified and coupling determinant identities", run: determinants },
    Suite { name: "gradient", description: "analytic quartic gradient against finite differences", run: gradient },
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> CliResult<SuiteReport> {
    let suite = SUITES.iter().find(|s| s.name == name).ok_or_else(|| {
        CliError::Usage(format!("unknown suite {name:?}; valid suites: {}", suite_names().join(", ")))
    })?;
    let reports = (suite.run)(opts)?;
    let passed = reports.iter().all(|r| r.passed);
    Ok(SuiteReport { suite: name.into(), description: suite.description.into(), seed: opts.seed, reports, passed })
}

fn factorial(n: u64) -> u128 {
    (1..=n as u128).product()
}

fn slope(ns: &[usize], ys: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = ys.iter().map(|v| v.abs().ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    sxy / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

/// A Gaussian matrix rescaled to a random operator norm in `[0.05, max_norm)`.
fn ball_point<R: Rng>(rng: &mut R, k: usize, max_norm: f64) -> CliResult<ComplexMatrix> {
    let g = gaussian_matrix(k, k, rng);
    let r: f64 = rng.random_range(0.05..max_norm);
    Ok(g.scale(r / g.sigma_max()?))
}

fn normalization(_: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let mut out = vec![];
    for n in 4..=7usize {
        let p = (n - 4) as u64;
        let ratio = (factorial(p + 1) * factorial(p)) as f64 / (factorial(p + 3) * factorial(p + 2)) as f64;
        let closed = PI.powi(4) * ratio;
        let mut r = CompareReport::new(format!("K({n},2)"));
        r.route(Row::new("closed-form", closed, Some(0.0), Uncertainty::Exact).inputs(Some(n), Some(2), None));
        let k = normalization_constant(n, 2)?.value;
        r.route(Row::logged("normalization-constant", k, Some(0.0), Uncertainty::Exact).inputs(Some(n), Some(2), None));
        let quad = detpower_integral_q2(n, 1e-7)?;
        r.route(Row::new("ball-quadrature", quad.value, Some(quad.error), Uncertainty::Quadrature).inputs(Some(n), Some(2), None));
        let a = r.compare(1, 0).rel_gap.unwrap_or(f64::INFINITY);
        let b = r.compare(2, 0).rel_gap.unwrap_or(f64::INFINITY);
        r.gate(Gate::at_most("constant vs closed form (relative)", a, 1e-12));
        r.gate(Gate::at_most("quadrature vs closed form (relative)", b, 1e-5));
        out.push(r);
    }
    Ok(out)
}

fn moments(o: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let single = PairingPattern::new(vec![1], vec![1], vec![1], vec![1])?;
    let mut first = moment_report(&single, 10, &seeded(o.seed, 1, o.samples(100_000)))?;
    let z = first.comparisons[0].z_score.unwrap_or(f64::INFINITY);
    first.gate(Gate::at_most("|mc - 1/N| in standard errors", z, 4.0));
    let mut out = vec![first];
    let distinct = PairingPattern::new(vec![1, 2], vec![1, 2], vec![1, 2], vec![1, 2])?;
    let repeated = PairingPattern::new(vec![1, 1], vec![1, 1], vec![1, 1], vec![1, 1])?;
    for (stream, p) in [(2, distinct), (3, repeated)] {
        let mut r = moment_report(&p, 64, &seeded(o.seed, stream, o.samples(1_000_000)))?;
        // The p=2 gate is max(4 sigma, 5/N^3), which is what moment_report applies.
        r.quantity = format!("{} pairings={}", r.quantity, p.pairing_count());
        out.push(r);
    }
    Ok(out)
}

fn q1_exponential(_: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let mut unscaled = CompareReport::new("E exp(beta |U_11|^2), beta=1, N=2");
    let series = exp_linear_example(1.0, 2, false)?;
    unscaled.route(Row::new("series", series.value, Some(series.error), Uncertainty::Quadrature).inputs(Some(2), Some(1), Some(1.0)));
    let quad = reduced_integral_q1(&DiscIntegrand::radial(f64::exp), 2, Normalization::Exact, &QuadOptions::relative(1e-13))?;
    let qv = quad.value.to_f64();
    unscaled.route(Row::new("disc-quadrature", qv, Some(quad.rel_error * qv), Uncertainty::Quadrature).inputs(Some(2), Some(1), Some(1.0)));
    unscaled.route(Row::new("closed-form", E - 1.0, Some(0.0), Uncertainty::Exact));
    unscaled.compare(0, 1);
    unscaled.gate(Gate::at_most("|series - quadrature|", (series.value - qv).abs(), 1e-10));
    unscaled.gate(Gate::at_most("|series - (e - 1)|", (series.value - (E - 1.0)).abs(), 1e-10));

    let mut scaled = CompareReport::new("E exp(beta N |U_11|^2), beta=0.5, N=1000");
    let s = exp_linear_example(0.5, 1000, true)?;
    scaled.route(Row::new("disc-quadrature", s.value, Some(s.error), Uncertainty::Quadrature).inputs(Some(1000), Some(1), Some(0.5)));
    scaled.route(Row::new("geometric-limit", s.limit.unwrap_or(f64::NAN), None, Uncertainty::Asymptotic));
    let gap = scaled.compare(0, 1).rel_gap.unwrap_or(f64::INFINITY);
    scaled.gate(Gate::at_most("relative gap to 1/(1 - beta)", gap, 0.005));
    Ok(vec![unscaled, scaled])
}

fn linear_saddle_suite(o: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let y = ComplexMatrix::scaled_identity(1, 0.8);
    let ns = [100usize, 200, 400];
    let mut conv = CompareReport::new("int exp(N y Re a), y=0.8: saddle / leading quadrature");
    let mut gaps = vec![];
    for &n in &ns {
        let s = linear_saddle(&y, n)?;
        let sv = s.log_asymptotic_value.expect("linear saddles are interior");
        let spec = IntegrandSpec::ExpLinear { y: y.clone(), scale: n as f64 };
        let q = leading_reduced_integral(&spec, n, 1, &McOptions::new(2, o.seed))?;
        conv.route(Row::logged("saddle", sv, None, Uncertainty::Asymptotic).inputs(Some(n), Some(1), None));
        let mag = q.value.log_magnitude().exp();
        conv.route(Row::logged("disc-quadrature", q.value, Some(q.uncertainty * mag), Uncertainty::Quadrature).inputs(Some(n), Some(1), None));
        let k = conv.routes.len();
        conv.compare(k - 2, k - 1);
        gaps.push(rel_gap(sv, q.value));
    }
    conv.gate(Gate::at_most("|saddle/quadrature - 1| at N=200", gaps[1], 0.03));
    conv.gate(Gate::within("log-log slope over N = 100, 200, 400", slope(&ns, &gaps), Some(-1.3), Some(-0.7)));

    let mut stat = CompareReport::new("stationarity and positivity");
    let s = linear_saddle(&y, 200)?;
    stat.gate(Gate::at_most("gradient residual, y=0.8", s.gradient_residual, 1e-10));
    let mut rng = RngStream::new(o.seed, 4).rng();
    let (mut worst, mut nonpositive, mut min_exponent) = (0.0f64, 0usize, f64::INFINITY);
    for _ in 0..50 {
        let q = rng.random_range(1..=3);
        let raw = random_hermitian(q, &mut rng);
        let norm = 10f64.powf(rng.random_range(-3.0..1.0));
        let yy = raw.scale(norm / raw.sigma_max()?);
        let r = linear_saddle(&yy, 100)?;
        worst = worst.max(r.gradient_residual).max(linear_maximizer_residual(&yy, &r.saddle_location)?);
        if !(r.exponent_per_n > 0.0) {
            nonpositive += 1;
        }
        min_exponent = min_exponent.min(r.exponent_per_n);
    }
    stat.gate(Gate::at_most("max stationarity residual over 50 random Y", worst, 1e-10));
    stat.gate(Gate::at_most("non-positive exponents over 50 random Y", nonpositive as f64, 0.0));
    stat.gate(Gate::at_least("smallest exponent per N", min_exponent, f64::MIN_POSITIVE));
    Ok(vec![conv, stat])
}

fn quartic_saddle_suite(o: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let mut conv = CompareReport::new("double integral exp(beta N |a|^2 |b|^2), beta=8: saddle / quadrature");
    let mut gaps = vec![];
    for n in [100usize, 200] {
        let s = quartic_saddle(&QuarticConfig::new(8.0, 1, n))?;
        let sv = s.log_asymptotic_value.expect("beta = 8 has an interior saddle");
        let q = quartic_integral_q1(8.0, n, &QuadOptions::relative(1e-10))?;
        conv.route(Row::logged("saddle", sv, None, Uncertainty::Asymptotic).inputs(Some(n), Some(1), Some(8.0)));
        let mag = q.value.log_magnitude().exp();
        conv.route(Row::logged("double-quadrature", q.value, Some(q.rel_error * mag), Uncertainty::Quadrature).inputs(Some(n), Some(1), Some(8.0)));
        let k = conv.routes.len();
        conv.compare(k - 2, k - 1);
        gaps.push(rel_gap(sv, q.value));
    }
    conv.gate(Gate::at_most("|saddle/quadrature - 1| at N=100", gaps[0], 0.05));
    conv.gate(Gate::holds("gap shrinks from N=100 to N=200", gaps[1] < gaps[0]));

    let (n, beta) = (20usize, 6.0);
    let mut mc = CompareReport::new("double integral at N=20, beta=6: shifted sampling vs quadrature");
    let q = quartic_integral_q1(beta, n, &QuadOptions::relative(1e-10))?;
    let opts = seeded(o.seed, 5, o.samples(1_000_000)).with_shift(ShiftMode::Auto).with_sampling(BlockSampling::Ball);
    let est = integrate_double(&IntegrandSpec::exp_quartic(beta, n), n, 1, &opts)?;
    mc.route(Row::sampled("double-monte-carlo", &est).inputs(Some(n), Some(1), Some(beta)).label("ball-sampling"));
    let mag = q.value.log_magnitude().exp();
    mc.route(Row::logged("double-quadrature", q.value, Some(q.rel_error * mag), Uncertainty::Quadrature).inputs(Some(n), Some(1), Some(beta)));
    // Compare in the shifted frame, where both numbers are O(1).
    let reference = (q.value / LogValue::from_log(est.shift)).to_f64();
    mc.compare(0, 1);
    mc.gate(Gate::at_most("|mc - quadrature| in standard errors", est.z_score(reference.into()), 4.0));
    Ok(vec![conv, mc])
}

fn quartic_threshold_suite(_: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let b = quartic_threshold();
    let mut r = CompareReport::new("beta*");
    r.route(Row::new("bisection", b, Some(b * f64::EPSILON), Uncertainty::Quadrature));
    r.gate(Gate::within("beta* range", b, Some(4.910), Some(4.912)));
    let per_n = |beta: f64| -> CliResult<f64> { Ok(quartic_saddle(&QuarticConfig::new(beta, 1, 10))?.exponent_per_n) };
    r.gate(Gate::at_most("|g| at beta*", per_n(b)?.abs(), 1e-10));
    let (below, above) = (per_n(b - 1e-10)?, per_n(b + 1e-10)?);
    r.gate(Gate::holds("sign change across beta* +- 1e-10", below < 0.0 && above > 0.0));
    r.gate(Gate::at_least("g at beta* + 0.1", per_n(b + 0.1)?, f64::MIN_POSITIVE));
    Ok(vec![r])
}

fn h_function(_: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let q_min = 10.0;
    let mut end = CompareReport::new("h'(q_min)");
    let h = h_of_q(q_min, q_min)?;
    end.route(Row::new("closed-form-derivative", h.derivative, None, Uncertainty::Exact));
    let step = 1e-10 * q_min;
    let fd = (h_of_q(q_min + step, q_min)?.value - h.value) / step;
    end.route(Row::new("one-sided-difference", fd, None, Uncertainty::Asymptotic));
    end.route(Row::new("4 - 2 log 2", 4.0 - 2.0 * LN_2, Some(0.0), Uncertainty::Exact));
    end.compare(0, 2);
    end.gate(Gate::at_most("|h'(q_min) - (4 - 2 log 2)|", (h.derivative - H_PRIME_AT_Q_MIN).abs(), 1e-4));
    end.gate(Gate::at_most("|difference quotient - (4 - 2 log 2)|", (fd - H_PRIME_AT_Q_MIN).abs(), 1e-4));

    let mut shape = CompareReport::new("h on [q_min, 50 q_min], 200 points");
    let rows = sweep_h(q_min, None, 50.0 * q_min, 200)?;
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let not_increasing = hs.windows(2).filter(|w| !(w[1] > w[0])).count();
    let not_convex = hs.windows(3).filter(|w| !(w[2] - 2.0 * w[1] + w[0] > 0.0)).count();
    shape.gate(Gate::at_most("non-increasing steps", not_increasing as f64, 0.0));
    shape.gate(Gate::at_most("non-convex triples", not_convex as f64, 0.0));

    let q_bar = 10.5;
    let mut weighted = CompareReport::new("frozen-c h, q_min=10, q_bar=10.5");
    let rows = sweep_h(q_min, Some(q_bar), 30.0, 201)?;
    let arg = rows.iter().find(|r| r.is_argmax).map(|r| r.q).unwrap_or(f64::NAN);
    weighted.route(Row::new("grid-argmax", arg, None, Uncertainty::Exact));
    weighted.gate(Gate::at_most("slope beyond q_bar", h_weighted_slope(q_min, q_bar)?, -f64::MIN_POSITIVE));
    weighted.gate(Gate::at_most("|argmax - q_bar|", (arg - q_bar).abs(), 0.0));
    Ok(vec![end, shape, weighted])
}

fn determinants(o: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let mut rng = RngStream::new(o.seed, 6).rng();
    let mut real = CompareReport::new("det of the realification = |det|^2, 1000 instances");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = gaussian_matrix(3, 3, &mut rng);
        let d = x.determinant()?.norm_sqr();
        worst = worst.max((det_realified(&x)? - d).abs() / d);
    }
    real.gate(Gate::at_most("max relative deviation", worst, 1e-10));

    let mut coupling = CompareReport::new("coupling determinant vs Kronecker assembly, 1000 instances");
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a = ball_point(&mut rng, 2, 0.95)?;
        let d = ball_point(&mut rng, 3, 0.95)?;
        let explicit = (&ComplexMatrix::identity(6) - &kron(&a.gram(), &d.gram())).determinant()?.re;
        worst = worst.max((coupling_det(&a, &d)? - explicit).abs() / explicit);
    }
    coupling.gate(Gate::at_most("max relative deviation", worst, 1e-10));
    Ok(vec![real, coupling])
}

fn gradient(o: &SuiteOptions) -> CliResult<Vec<CompareReport>> {
    let mut rng = RngStream::new(o.seed, 7).rng();
    let beta = 6.0;
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pair = [ball_point(&mut rng, 2, 0.9)?, ball_point(&mut rng, 2, 0.9)?];
        let analytic = g_quartic(&pair[0], &pair[1], beta)?.real_gradient();
        let mut k = 0;
        for which in 0..2 {
            for idx in 0..4 {
                for part in 0..2 {
                    let bump = |s: f64| -> CliResult<f64> {
                        let mut m = pair.clone();
                        let dz = if part == 0 { num_complex::Complex64::new(s, 0.0) } else { num_complex::Complex64::new(0.0, s) };
                        let z = m[which].get(idx / 2, idx % 2);
                        m[which].set(idx / 2, idx % 2, z + dz);
                        Ok(g_quartic(&m[0], &m[1], beta)?.value)
                    };
                    let fd = (bump(h)? - bump(-h)?) / (2.0 * h);
                    worst = worst.max((fd - analytic[k]).abs());
                    k += 1;
                }
            }
        }
    }
    let mut r = CompareReport::new("quartic gradient, 100 random ball points, beta=6");
    r.gate(Gate::at_most("max |analytic - central difference|", worst, 1e-6));
    Ok(vec![r])
}
