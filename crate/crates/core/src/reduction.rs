//! Exact reduction of `U(N)` integrals to weighted integrals over the ball of
//! `q x q` matrices.
//!
//! The leading block `A` of a Haar unitary has density
//! `det(1 - A*A)^{N-2q} / K(N, q)` with respect to Lebesgue measure on the
//! ball, where
//!
//! ```text
//! K(N, q) = pi^{q^2} prod_{k=1..q} (N-q-k)! / (N-k)!
//! ```
//!
//! Deterministic quadratures are provided for `q = 1` (the disc) and, for
//! rotation-invariant weights, `q = 2`. Anything else is sampled.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::mc::{integrate_single, BlockSampling, IntegrandSpec, McEstimate, McOptions};
use crate::quadrature::{integrate, integrate_fallible, QuadOptions, QuadResult};

/// Largest `N` for which `K(N, q)` is assembled from exact integer factorials.
pub const EXACT_FACTORIAL_LIMIT: usize = 20;

/// `K(N, q)`, the ball integral of `det(1 - A*A)^{N-2q}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionConstant {
    pub n: usize,
    pub q: usize,
    pub value: LogValue,
    /// `prod_k (N-k)!/(N-q-k)!` when it was computed exactly and fits.
    pub exact_denominator: Option<u128>,
}

fn falling_factorial(top: u64, len: u64) -> u64 {
    (0..len).map(|j| top - j).product()
}

pub fn normalization_constant(n: usize, q: usize) -> Result<ReductionConstant> {
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    if n < 2 * q {
        return Err(Error::ReductionDomain { n, q });
    }
    let q2 = (q * q) as f64;
    let (log_den, exact_denominator) = if n <= EXACT_FACTORIAL_LIMIT {
        // (N-k)!/(N-q-k)! is a falling factorial of length q; each fits in u64.
        let factors: Vec<u64> = (1..=q).map(|k| falling_factorial((n - k) as u64, q as u64)).collect();
        let exact = factors.iter().try_fold(1u128, |acc, &f| acc.checked_mul(f as u128));
        let log = match exact {
            Some(d) if d < (1u128 << 53) => (d as f64).ln(),
            _ => factors.iter().map(|&f| (f as f64).ln()).sum(),
        };
        (log, exact)
    } else {
        let log = (1..=q)
            .map(|k| ln_gamma((n - k + 1) as f64) - ln_gamma((n - q - k + 1) as f64))
            .sum();
        (log, None)
    };
    Ok(ReductionConstant { n, q, value: LogValue::from_log(q2 * PI.ln() - log_den), exact_denominator })
}

/// Natural log of the Lebesgue volume of the ball of `q x q` matrices.
pub fn ball_log_volume(q: usize) -> Result<f64> {
    Ok(normalization_constant(2 * q, q)?.value.log_magnitude())
}

/// How the disc integral is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `1/K(N,1) = (N-1)/pi`: the exact Haar expectation.
    Exact,
    /// `N/pi`: the large-N prefactor.
    Leading,
}

impl Normalization {
    fn log_prefactor(self, n: usize, q: usize) -> Result<f64> {
        Ok(match self {
            Normalization::Exact => -normalization_constant(n, q)?.value.log_magnitude(),
            Normalization::Leading => (q * q) as f64 * (n as f64 / PI).ln(),
        })
    }
}

/// Integrand on the unit disc.
#[derive(Clone)]
pub enum DiscIntegrand {
    /// A function of `u = |a|^2`.
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Planar(Arc<dyn Fn(Complex64) -> f64 + Send + Sync>),
    /// `exp(radial |a|^2 + Re(linear a))`, integrated in the log domain.
    Exponential { radial: f64, linear: Complex64 },
}

impl DiscIntegrand {
    pub fn radial(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DiscIntegrand::Radial(Arc::new(f))
    }

    pub fn planar(f: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        DiscIntegrand::Planar(Arc::new(f))
    }
}

impl std::fmt::Debug for DiscIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiscIntegrand::Radial(_) => write!(f, "Radial(..)"),
            DiscIntegrand::Planar(_) => write!(f, "Planar(..)"),
            DiscIntegrand::Exponential { radial, linear } => {
                write!(f, "Exponential {{ radial: {radial}, linear: {linear} }}")
            }
        }
    }
}

/// A quadrature result in the log domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedValue {
    pub value: LogValue,
    /// Estimated relative error.
    pub rel_error: f64,
    pub evaluations: usize,
}

/// Approximate maximum of `h` over `[0, 1]`: a grid scan refined by golden
/// sections. Used only to pick exponent shifts, so modest accuracy suffices.
fn unit_interval_peak(h: impl Fn(f64) -> f64) -> f64 {
    const GRID: usize = 4096;
    let mut best = h(0.0);
    let mut arg = 0.0;
    for k in 1..=GRID {
        let x = k as f64 / GRID as f64;
        let v = h(x);
        if v > best {
            best = v;
            arg = x;
        }
    }
    let (mut lo, mut hi) = ((arg - 1.0 / GRID as f64).max(0.0), (arg + 1.0 / GRID as f64).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if h(x1) < h(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    best.max(h(0.5 * (lo + hi)))
}

/// `w ln(1 - u)`, with the convention `0 * ln 0 = 0`.
fn log_weight(w: f64, u: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * (-u).ln_1p()
    }
}

/// Integral of `f(a) (1 - |a|^2)^{N-2}` over the disc, times the prefactor
/// selected by `mode`.
pub fn reduced_integral_q1(f: &DiscIntegrand, n: usize, mode: Normalization, opts: &QuadOptions) -> Result<ReducedValue> {
    if n < 2 {
        return Err(Error::ReductionDomain { n, q: 1 });
    }
    let w = (n - 2) as f64;
    let weight = move |u: f64| if w == 0.0 { 1.0 } else { (w * (-u).ln_1p()).exp() };
    let (raw, shift) = match f {
        DiscIntegrand::Radial(g) => {
            let r = integrate(|u| g(u) * weight(u), 0.0, 1.0, opts)?;
            (QuadResult { value: PI * r.value, error: PI * r.error, ..r }, 0.0)
        }
        DiscIntegrand::Planar(g) => {
            let inner = QuadOptions { rel_tol: opts.rel_tol * 0.1, ..*opts };
            let mut evals = 0;
            let r = integrate_fallible(
                |r| {
                    let ang = integrate(|phi| g(Complex64::from_polar(r, phi)), 0.0, 2.0 * PI, &inner)?;
                    evals += ang.evaluations;
                    Ok(r * weight(r * r) * ang.value)
                },
                0.0,
                1.0,
                opts,
            )?;
            (QuadResult { evaluations: evals, ..r }, 0.0)
        }
        DiscIntegrand::Exponential { radial, linear } => {
            let lin = linear.norm();
            let shift = unit_interval_peak(|r| radial * r * r + lin * r + log_weight(w, r * r));
            let log_w = move |u: f64| log_weight(w, u);
            if lin == 0.0 {
                let r = integrate(|u| (radial * u + log_w(u) - shift).exp(), 0.0, 1.0, opts)?;
                (QuadResult { value: PI * r.value, error: PI * r.error, ..r }, shift)
            } else {
                // Rotate the phase of `linear` away and use the reflection
                // symmetry in the angle.
                let inner = QuadOptions { rel_tol: opts.rel_tol * 0.1, ..*opts };
                let mut evals = 0;
                let r = integrate_fallible(
                    |r| {
                        let base = radial * r * r + log_w(r * r) - shift;
                        let ang = integrate(|phi| (base + lin * r * phi.cos()).exp(), 0.0, PI, &inner)?;
                        evals += ang.evaluations;
                        Ok(2.0 * r * ang.value)
                    },
                    0.0,
                    1.0,
                    opts,
                )?;
                (QuadResult { evaluations: evals, ..r }, shift)
            }
        }
    };
    let log_pref = mode.log_prefactor(n, 1)?;
    let value = LogValue::from_f64(raw.value) * LogValue::from_log(log_pref + shift);
    let rel_error = if raw.value == 0.0 { raw.error } else { raw.error / raw.value.abs() };
    Ok(ReducedValue { value, rel_error, evaluations: raw.evaluations })
}

/// The double Haar integral of `exp(beta N |a_<|^2 |a_>|^2)` over two
/// independent `1 x 1` blocks,
/// `(N-1)^2 int int exp(beta N u v) (1-u)^{N-2} (1-v)^{N-2} du dv`.
pub fn quartic_integral_q1(beta: f64, n: usize, opts: &QuadOptions) -> Result<ReducedValue> {
    if n < 2 {
        return Err(Error::ReductionDomain { n, q: 1 });
    }
    let (nf, w) = (n as f64, (n - 2) as f64);
    // By concavity of the weight the peak lies on the diagonal u = v.
    let shift = unit_interval_peak(|u| beta * nf * u * u + 2.0 * log_weight(w, u));
    let inner = QuadOptions { rel_tol: opts.rel_tol * 0.1, ..*opts };
    let mut evals = 0;
    let r = integrate_fallible(
        |u| {
            let base = log_weight(w, u) - shift;
            let iv = integrate(|v| (beta * nf * u * v + log_weight(w, v) + base).exp(), 0.0, 1.0, &inner)?;
            evals += iv.evaluations;
            Ok(iv.value)
        },
        0.0,
        1.0,
        opts,
    )?;
    Ok(ReducedValue {
        value: LogValue::from_f64(r.value) * LogValue::from_log(shift + 2.0 * (nf - 1.0).ln()),
        rel_error: r.error / r.value.abs(),
        evaluations: evals,
    })
}

/// Ball integral of `det(1 - A*A)^{exponent}` over `2 x 2` matrices, by the
/// four-dimensional reduction for rotation-invariant weights.
pub fn detpower_ball_integral_q2(exponent: u32, opts: &QuadOptions) -> Result<QuadResult> {
    let p = exponent as i32;
    let l3 = QuadOptions { rel_tol: opts.rel_tol * 0.1, ..*opts };
    let l2 = QuadOptions { rel_tol: opts.rel_tol * 0.01, ..*opts };
    let l1 = QuadOptions { rel_tol: opts.rel_tol * 0.001, ..*opts };
    let mut evals = 0usize;
    // Order, outermost first: r, R-hat, cos(theta), R. The integrand is even
    // in cos(theta), so that range is folded onto [0, 1].
    let res = integrate_fallible(
        |r| {
            let r2 = r * r;
            let rh_max = (1.0 - r2).max(0.0).sqrt();
            let lvl2 = integrate_fallible(
                |rh| {
                    let rh2 = rh * rh;
                    let lvl3 = integrate_fallible(
                        |ct| {
                            let st2 = 1.0 - ct * ct;
                            let big_max = ((1.0 - rh2 * ct * ct).max(0.0).sqrt() - (r2 + rh2 * st2).sqrt()).max(0.0);
                            let inner = integrate(
                                |big| {
                                    let b2 = big * big;
                                    let s = 1.0 - (b2 + r2 + rh2);
                                    let det = (s * s - 4.0 * b2 * (r2 + rh2 * st2)).max(0.0);
                                    b2 * det.powi(p)
                                },
                                0.0,
                                big_max,
                                &l1,
                            )?;
                            evals += inner.evaluations;
                            Ok(inner.value)
                        },
                        0.0,
                        1.0,
                        &l2,
                    )?;
                    Ok(rh2 * lvl3.value)
                },
                0.0,
                rh_max,
                &l3,
            )?;
            Ok(r * lvl2.value)
        },
        0.0,
        1.0,
        opts,
    )?;
    let scale = 2.0 * 256.0 * PI.powi(3);
    Ok(QuadResult { value: scale * res.value, error: scale * res.error, evaluations: evals })
}

/// `int det(1 - A*A)^{N-4} dA` over the ball of `2 x 2` matrices, which
/// equals `K(N, 2)`.
pub fn detpower_integral_q2(n: usize, rel_tol: f64) -> Result<QuadResult> {
    if n < 4 {
        return Err(Error::ReductionDomain { n, q: 2 });
    }
    detpower_ball_integral_q2((n - 4) as u32, &QuadOptions::relative(rel_tol))
}

/// Haar expectation of `f(A)` for any `q <= N/2`, by sampling blocks; exact
/// in distribution.
pub fn reduced_expectation(f: &IntegrandSpec, n: usize, q: usize, opts: &McOptions) -> Result<McEstimate> {
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    if n < 2 * q {
        return Err(Error::ReductionDomain { n, q });
    }
    integrate_single(f, n, q, &McOptions { sampling: BlockSampling::Haar, ..*opts })
}

/// Which route produced a leading-order integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeadingRoute {
    DiscQuadrature,
    BallQuadrature,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingIntegral {
    pub value: LogValue,
    /// Relative uncertainty: quadrature estimate or one standard error.
    pub uncertainty: f64,
    pub route: LeadingRoute,
    /// Set when no deterministic rule applies and the value was sampled.
    pub mc_fallback: bool,
    pub caveat: String,
}

const LEADING_CAVEAT: &str =
    "leading order: the Haar integral times (N/pi)^{q^2} K(N,q), which is 1 + O(1/N)";

/// Recasts a `1 x 1` block integrand as a disc integrand, when possible.
pub fn disc_integrand(f: &IntegrandSpec) -> Option<DiscIntegrand> {
    use crate::matrix::ComplexMatrix;
    match f.clone() {
        IntegrandSpec::Constant(c) => Some(DiscIntegrand::radial(move |_| c)),
        IntegrandSpec::DetPower { power } => Some(DiscIntegrand::radial(move |u| (1.0 - u).powf(power))),
        IntegrandSpec::ExpLinear { y, scale } if y.rows() == 1 && y.cols() == 1 => {
            Some(DiscIntegrand::Exponential { radial: 0.0, linear: y.get(0, 0) * scale })
        }
        IntegrandSpec::ExpQuartic { beta, scale } => Some(DiscIntegrand::radial(move |u| (scale * beta * u * u).exp())),
        IntegrandSpec::Monomial(p) if p.max_row() <= 1 && p.max_col() <= 1 => {
            let (k, l) = (p.plain.len() as i32, p.conjugated.len() as i32);
            Some(DiscIntegrand::planar(move |a| (a.powi(k) * a.conj().powi(l)).re))
        }
        IntegrandSpec::Callback(g) => Some(DiscIntegrand::planar(move |a| {
            g(&ComplexMatrix::from_fn(1, 1, |_, _| a)).re
        })),
        _ => None,
    }
}

/// `(N/pi)^{q^2} int f(A) det(1 - A*A)^{N-2q} dA` over the ball.
///
/// Uses the disc quadrature at `q = 1`, the four-dimensional quadrature at
/// `q = 2` for constants and determinant powers, and Haar block sampling
/// otherwise (flagged as a fallback). Quadrature routes integrate the real
/// part of the integrand.
pub fn leading_reduced_integral(f: &IntegrandSpec, n: usize, q: usize, mc: &McOptions) -> Result<LeadingIntegral> {
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    if n < 2 * q {
        return Err(Error::ReductionDomain { n, q });
    }
    let caveat = LEADING_CAVEAT.to_string();
    if q == 1 {
        if let Some(d) = disc_integrand(f) {
            let r = reduced_integral_q1(&d, n, Normalization::Leading, &QuadOptions::relative(1e-10))?;
            return Ok(LeadingIntegral {
                value: r.value,
                uncertainty: r.rel_error,
                route: LeadingRoute::DiscQuadrature,
                mc_fallback: false,
                caveat,
            });
        }
    }
    let pref = Normalization::Leading.log_prefactor(n, q)?;
    if q == 2 {
        let quad = match f {
            IntegrandSpec::Constant(c) => Some((*c, 0.0)),
            IntegrandSpec::DetPower { power } if *power >= 0.0 && power.fract() == 0.0 => Some((1.0, *power)),
            _ => None,
        };
        if let Some((c, extra)) = quad {
            let r = detpower_ball_integral_q2((n - 4) as u32 + extra as u32, &QuadOptions::relative(1e-6))?;
            return Ok(LeadingIntegral {
                value: LogValue::from_f64(c * r.value) * LogValue::from_log(pref),
                uncertainty: r.error / r.value.abs(),
                route: LeadingRoute::BallQuadrature,
                mc_fallback: false,
                caveat,
            });
        }
    }
    let est = reduced_expectation(f, n, q, mc)?;
    let k = normalization_constant(n, q)?.value;
    let value = est.log_mean() * k * LogValue::from_log(pref);
    let uncertainty = if est.mean.norm() == 0.0 { f64::INFINITY } else { est.std_error / est.mean.norm() };
    Ok(LeadingIntegral { value, uncertainty, route: LeadingRoute::MonteCarlo, mc_fallback: true, caveat })
}
