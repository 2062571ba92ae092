//! Saddle-point asymptotics for the linear functional `Re Tr(AY)` and the
//! quartic functional `T(A_<, A_>)`, plus the exponent functions of the
//! subsystem-size analysis.
//!
//! The linear exponent is `g(A) = Re Tr(AY) + log det(1 - A*A)`, maximized at
//! `A_0 = Y / (sqrt(Y^2 + 1) + 1)`. The quartic exponent is
//! `g(A_<, A_>) = beta T(A_<, A_>) + log det(1 - A_<*A_<) + log det(1 - A_>*A_>)`
//! with `T = sum_x |(A_<)_xx|^2 |(A_>)_xx|^2`, whose interior maxima sit at
//! `A_< = A_> = c 1` up to diagonal phases, with
//! `c^2 = 1/2 + sqrt(1 - 4/beta) / 2`.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;
use crate::matrix::{hermitian_eigen, log_coupling_det, ComplexMatrix};
use crate::reduction::{reduced_integral_q1, DiscIntegrand, Normalization};
use crate::quadrature::QuadOptions;

/// `2c^2 - 1` below which a quartic saddle is flagged unreliable.
pub const RELIABILITY_FLOOR: f64 = 1e-8;

const FD_STEP: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaddleStatus {
    InteriorSaddle,
    NoInteriorSaddle,
    BoundaryDominated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleReport {
    pub n: usize,
    pub q: usize,
    /// `A_0`, or the gauge-fixed representative `c 1` of the quartic saddle.
    pub saddle_location: ComplexMatrix,
    /// The exponent `g` at the saddle.
    pub exponent_per_n: f64,
    /// `N g + prefactor_log`; absent when there is no interior saddle.
    pub log_asymptotic_value: Option<LogValue>,
    pub prefactor_log: Option<f64>,
    /// Smallest nonzero Hessian eigenvalue magnitude in real coordinates.
    pub hessian_min_abs_eigen: f64,
    /// Number of flat (gauge) directions.
    pub zero_modes: usize,
    /// Largest Wirtinger gradient entry at the saddle.
    pub gradient_residual: f64,
    pub status: SaddleStatus,
    /// False when the Gaussian prefactor degenerates.
    pub reliable: bool,
}

// ---------------------------------------------------------------------------
// Real-coordinate helpers
// ---------------------------------------------------------------------------

/// Real derivatives `(d/dx, d/dy)` of a real function from its Wirtinger
/// derivative `d/dz`.
fn real_pair(dz: Complex64) -> [f64; 2] {
    [2.0 * dz.re, -2.0 * dz.im]
}

fn pack(ms: &[&ComplexMatrix]) -> Vec<f64> {
    ms.iter().flat_map(|m| m.entries_row_major().into_iter().flat_map(|z| [z.re, z.im])).collect()
}

fn unpack(x: &[f64], q: usize, count: usize) -> Vec<ComplexMatrix> {
    (0..count)
        .map(|b| {
            let off = b * 2 * q * q;
            ComplexMatrix::from_fn(q, q, |i, j| {
                let k = off + 2 * (i * q + j);
                Complex64::new(x[k], x[k + 1])
            })
        })
        .collect()
}

fn real_gradient(dzs: &[&ComplexMatrix]) -> Vec<f64> {
    dzs.iter().flat_map(|m| m.entries_row_major().into_iter().flat_map(real_pair)).collect()
}

/// Eigenvalues (ascending) of the Hessian obtained by central differences of
/// an analytic gradient.
fn numerical_hessian_eigen(x0: &[f64], grad: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let d = x0.len();
    let mut h = DMatrix::<f64>::zeros(d, d);
    let mut x = x0.to_vec();
    for j in 0..d {
        x[j] = x0[j] + FD_STEP;
        let gp = grad(&x)?;
        x[j] = x0[j] - FD_STEP;
        let gm = grad(&x)?;
        x[j] = x0[j];
        for i in 0..d {
            h[(i, j)] = (gp[i] - gm[i]) / (2.0 * FD_STEP);
        }
    }
    let sym = (&h + h.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `(zero-mode count, smallest nonzero |eigenvalue|)`.
fn classify_modes(ev: &[f64]) -> (usize, f64) {
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-6 * scale;
    let zeros = ev.iter().filter(|v| v.abs() <= tol).count();
    let min = ev.iter().filter(|v| v.abs() > tol).fold(f64::INFINITY, |m, v| m.min(v.abs()));
    (zeros, min)
}

/// Wirtinger derivative of `log det(1 - A*A)`: `-((1 - A*A)^{-1} A*)^T`.
fn logdet_gradient(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let q = a.cols();
    let m = &ComplexMatrix::identity(q) - &a.gram();
    Ok((&m.inverse()? * &a.adjoint()).transpose().scale(-1.0))
}

fn logdet_one_minus_gram(a: &ComplexMatrix) -> Result<f64> {
    let s2 = a.ensure_in_ball()?;
    Ok(s2.iter().map(|&x| (-x).ln_1p()).sum())
}

// ---------------------------------------------------------------------------
// Linear functional
// ---------------------------------------------------------------------------

/// `g(A) = Re Tr(AY) + log det(1 - A*A)` and its Wirtinger gradient.
pub fn g_linear(a: &ComplexMatrix, y: &ComplexMatrix) -> Result<(f64, ComplexMatrix)> {
    if !a.is_square() || a.rows() != y.rows() || !y.is_square() {
        return Err(Error::DimensionMismatch("A and Y must be square of equal size".into()));
    }
    let value = (a * y).trace().re + logdet_one_minus_gram(a)?;
    let grad = &y.transpose().scale(0.5) + &logdet_gradient(a)?;
    Ok((value, grad))
}

/// `max |2 A_0 (1 - A_0*A_0)^{-1} - Y|`, the stationarity defect of `A_0`.
pub fn linear_maximizer_residual(y: &ComplexMatrix, a0: &ComplexMatrix) -> Result<f64> {
    a0.ensure_in_ball()?;
    let q = a0.rows();
    let m = (&ComplexMatrix::identity(q) - &a0.gram()).inverse()?;
    Ok((&(a0 * &m).scale(2.0) - y).max_abs())
}

/// Saddle point of `int exp(N Re Tr(AY))` over Haar unitaries, `Y` Hermitian.
pub fn linear_saddle(y: &ComplexMatrix, n: usize) -> Result<SaddleReport> {
    if !y.is_square() {
        return Err(Error::DimensionMismatch("Y must be square".into()));
    }
    let q = y.rows();
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    let eig = hermitian_eigen(y)?;
    // Spectral calculus; zero eigenvalues map to zero.
    let a: Vec<f64> = eig.values.iter().map(|&l| l / ((l * l + 1.0).sqrt() + 1.0)).collect();
    let v = &eig.vectors;
    let a0 = &(v * &ComplexMatrix::from_real_diagonal(&a)) * &v.adjoint();
    let exponent: f64 = a.iter().zip(&eig.values).map(|(&ai, &li)| ai * li + (-ai * ai).ln_1p()).sum();
    let prefactor_log = -0.5 * log_coupling_det(&a0, &a0)?;
    let (_, grad) = g_linear(&a0, y)?;
    let x0 = pack(&[&a0]);
    let ev = numerical_hessian_eigen(&x0, |x| {
        let m = unpack(x, q, 1);
        let (_, g) = g_linear(&m[0], y)?;
        Ok(real_gradient(&[&g]))
    })?;
    let (zero_modes, min_abs) = classify_modes(&ev);
    Ok(SaddleReport {
        n,
        q,
        saddle_location: a0,
        exponent_per_n: exponent,
        log_asymptotic_value: Some(LogValue::from_log(n as f64 * exponent + prefactor_log)),
        prefactor_log: Some(prefactor_log),
        hessian_min_abs_eigen: min_abs,
        zero_modes,
        gradient_residual: grad.max_abs(),
        status: SaddleStatus::InteriorSaddle,
        reliable: true,
    })
}

// ---------------------------------------------------------------------------
// Quartic functional
// ---------------------------------------------------------------------------

/// `T(A_<, A_>) = sum_x |(A_<)_xx|^2 |(A_>)_xx|^2`.
pub fn t_functional(a_lt: &ComplexMatrix, a_gt: &ComplexMatrix) -> Result<f64> {
    if !a_lt.is_square() || a_lt.rows() != a_gt.rows() || a_lt.cols() != a_gt.cols() {
        return Err(Error::DimensionMismatch("T needs square blocks of equal size".into()));
    }
    Ok((0..a_lt.rows()).map(|x| a_lt.get(x, x).norm_sqr() * a_gt.get(x, x).norm_sqr()).sum())
}

/// Value and Wirtinger gradient of the quartic exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarticValue {
    pub value: f64,
    /// `dg/dA_<` entrywise; the derivative with respect to the conjugate
    /// entries is its complex conjugate.
    pub grad_lt: ComplexMatrix,
    pub grad_gt: ComplexMatrix,
}

impl QuarticValue {
    /// Gradient in real coordinates `(Re, Im)` of each entry, `A_<` first,
    /// row-major.
    pub fn real_gradient(&self) -> Vec<f64> {
        real_gradient(&[&self.grad_lt, &self.grad_gt])
    }

    pub fn max_abs_gradient(&self) -> f64 {
        self.grad_lt.max_abs().max(self.grad_gt.max_abs())
    }
}

pub fn g_quartic(a_lt: &ComplexMatrix, a_gt: &ComplexMatrix, beta: f64) -> Result<QuarticValue> {
    let t = t_functional(a_lt, a_gt)?;
    let value = beta * t + logdet_one_minus_gram(a_lt)? + logdet_one_minus_gram(a_gt)?;
    let q = a_lt.rows();
    let mut d_lt = logdet_gradient(a_lt)?;
    let mut d_gt = logdet_gradient(a_gt)?;
    for x in 0..q {
        let (l, g) = (a_lt.get(x, x), a_gt.get(x, x));
        d_lt.set(x, x, d_lt.get(x, x) + l.conj() * g.norm_sqr() * beta);
        d_gt.set(x, x, d_gt.get(x, x) + g.conj() * l.norm_sqr() * beta);
    }
    Ok(QuarticValue { value, grad_lt: d_lt, grad_gt: d_gt })
}

/// `c` with `c^2 = 1/2 + sqrt(1 - 4/beta)/2`. At `beta = 4` this is the
/// degenerate point `c^2 = 1/2`.
pub fn quartic_c(beta: f64) -> Result<f64> {
    if !(beta >= 4.0) {
        return Err(Error::NoInteriorSaddle(beta));
    }
    Ok((0.5 + 0.5 * (1.0 - 4.0 / beta).sqrt()).sqrt())
}

/// Inverse of [`quartic_c`]: `beta = 1 / (c^2 (1 - c^2))`.
pub fn beta_of_c(c: f64) -> Result<f64> {
    if !(std::f64::consts::FRAC_1_SQRT_2..1.0).contains(&c) {
        return Err(Error::Domain(format!("c = {c} must lie in [1/sqrt(2), 1)")));
    }
    let c2 = c * c;
    Ok(1.0 / (c2 * (1.0 - c2)))
}

/// `u/(1-u) + 2 log(1-u)`: the quartic exponent per diagonal entry at
/// `c^2 = u`.
pub fn quartic_exponent_unit(u: f64) -> f64 {
    u / (1.0 - u) + 2.0 * (-u).ln_1p()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticConfig {
    pub beta: f64,
    pub q: usize,
    pub n: usize,
    pub q_min: Option<f64>,
}

impl QuarticConfig {
    pub fn new(beta: f64, q: usize, n: usize) -> Self {
        QuarticConfig { beta, q, n, q_min: None }
    }

    /// `beta = 4 q^3 / q_min^3`.
    pub fn from_q_min(q: usize, q_min: f64, n: usize) -> Self {
        let r = q as f64 / q_min;
        QuarticConfig { beta: 4.0 * r * r * r, q, n, q_min: Some(q_min) }
    }

    fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::EmptyDimension);
        }
        if self.n < 2 * self.q {
            return Err(Error::ReductionDomain { n: self.n, q: self.q });
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::Domain(format!("beta = {} must be positive", self.beta)));
        }
        if let Some(qm) = self.q_min {
            if !(qm > 0.0) {
                return Err(Error::Domain(format!("q_min = {qm} must be positive")));
            }
        }
        Ok(())
    }
}

/// Hessian eigenvalues of the quartic exponent at `A_< = A_> = c 1`.
fn quartic_hessian_eigen(c: f64, beta: f64, q: usize) -> Result<Vec<f64>> {
    let a = ComplexMatrix::scaled_identity(q, c);
    let x0 = pack(&[&a, &a]);
    numerical_hessian_eigen(&x0, |x| {
        let m = unpack(x, q, 2);
        Ok(g_quartic(&m[0], &m[1], beta)?.real_gradient())
    })
}

/// Saddle point of `int int exp(beta N T(A_<, A_>))` over two independent
/// Haar unitaries, with gauge-fixed representative `c 1`.
pub fn quartic_saddle(cfg: &QuarticConfig) -> Result<SaddleReport> {
    cfg.validate()?;
    let (beta, q, n) = (cfg.beta, cfg.q, cfg.n);
    let (qf, nf) = (q as f64, n as f64);
    let origin = |status| -> Result<SaddleReport> {
        let c = if beta == 4.0 { quartic_c(beta)? } else { 0.0 };
        let loc = ComplexMatrix::scaled_identity(q, c);
        let ev = quartic_hessian_eigen(c, beta, q)?;
        let (zero_modes, min_abs) = classify_modes(&ev);
        let g = g_quartic(&loc, &loc, beta)?;
        Ok(SaddleReport {
            n,
            q,
            saddle_location: loc,
            exponent_per_n: g.value,
            log_asymptotic_value: None,
            prefactor_log: None,
            hessian_min_abs_eigen: min_abs,
            zero_modes,
            gradient_residual: g.max_abs_gradient(),
            status,
            reliable: false,
        })
    };
    if beta <= 4.0 {
        return origin(SaddleStatus::NoInteriorSaddle);
    }
    let c = quartic_c(beta)?;
    let c2 = c * c;
    let per_n = qf * quartic_exponent_unit(c2);
    let gap = 2.0 * c2 - 1.0;
    let prefactor_log = qf * (2.0 * PI * nf).ln() - qf * qf * (-(c2 * c2)).ln_1p()
        + qf * ((1.0 + c2) / (1.0 - c2) * c2 / gap.sqrt()).ln();
    let loc = ComplexMatrix::scaled_identity(q, c);
    let g = g_quartic(&loc, &loc, beta)?;
    let ev = quartic_hessian_eigen(c, beta, q)?;
    let (zero_modes, min_abs) = classify_modes(&ev);
    let status = if per_n > 0.0 { SaddleStatus::InteriorSaddle } else { SaddleStatus::BoundaryDominated };
    Ok(SaddleReport {
        n,
        q,
        saddle_location: loc,
        exponent_per_n: per_n,
        log_asymptotic_value: Some(LogValue::from_log(nf * per_n + prefactor_log)),
        prefactor_log: Some(prefactor_log),
        hessian_min_abs_eigen: min_abs,
        zero_modes,
        gradient_residual: g.max_abs_gradient(),
        status,
        reliable: gap >= RELIABILITY_FLOOR,
    })
}

/// The `beta` above which the quartic saddle beats the origin: the root of
/// `u/(1-u) + 2 log(1-u)` on `(1/2, 1)` mapped through `beta = 1/(u(1-u))`.
pub fn quartic_threshold() -> f64 {
    let u = threshold_u();
    1.0 / (u * (1.0 - u))
}

fn threshold_u() -> f64 {
    let (mut lo, mut hi) = (0.5, 0.99);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if quartic_exponent_unit(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The 2x2 blocks of the quadratic expansion around the quartic saddle, and
/// the mode count of the full Hessian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HessianBlocks {
    pub c: f64,
    /// Real parts of the diagonal entries of the two blocks.
    pub e: [[f64; 2]; 2],
    /// Off-diagonal entries paired across the two blocks.
    pub f: [[f64; 2]; 2],
    /// `det(E) (1-c^2)^4 / 4`, which equals `2c^2 - 1`.
    pub det_e_scaled: f64,
    /// `det(F) (1-c^2)^4`, which equals `1 - c^4`.
    pub det_f_scaled: f64,
    pub zero_modes: usize,
    pub negative_modes: usize,
    pub min_abs_nonzero: f64,
}

pub fn quartic_hessian_blocks(beta: f64, q: usize) -> Result<HessianBlocks> {
    if !(beta > 4.0) {
        return Err(Error::NoInteriorSaddle(beta));
    }
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    let c = quartic_c(beta)?;
    let c2 = c * c;
    let s = 1.0 - c2;
    let pe = 2.0 / (s * s);
    let e = [[pe * c2, -pe * s], [-pe * s, pe * c2]];
    let pf = 1.0 / (s * s);
    let f = [[pf, pf * c2], [pf * c2, pf]];
    let det2 = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s4 = s.powi(4);
    let ev = quartic_hessian_eigen(c, beta, q)?;
    let (zero_modes, min_abs) = classify_modes(&ev);
    let scale = ev.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    Ok(HessianBlocks {
        c,
        e,
        f,
        det_e_scaled: det2(e) * s4 / 4.0,
        det_f_scaled: det2(f) * s4,
        zero_modes,
        negative_modes: ev.iter().filter(|v| **v < -1e-6 * scale).count(),
        min_abs_nonzero: min_abs,
    })
}

// ---------------------------------------------------------------------------
// Exponent functions of the subsystem size
// ---------------------------------------------------------------------------

/// `c(q)^2 = 1/2 + sqrt(1 - q_min^3/q^3)/2`.
pub fn c_squared_of_q(q: f64, q_min: f64) -> Result<f64> {
    if !(q_min > 0.0) || !(q >= q_min) {
        return Err(Error::Domain(format!("need q >= q_min > 0 (q = {q}, q_min = {q_min})")));
    }
    let r = (q_min / q).powi(3);
    Ok(0.5 + 0.5 * (1.0 - r).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub value: f64,
    pub derivative: f64,
}

/// `h(q) = q (c^2/(1-c^2) + 2 log(1-c^2))` with `c = c(q)`, and its exact
/// derivative `G(u) + 3 q_min^3 / (4 q^3 (1-u)^2)` with `u = c^2`.
pub fn h_of_q(q: f64, q_min: f64) -> Result<HValue> {
    let s = one_minus_c_squared(q, q_min)?;
    let g = exponent_from_gap(s);
    let r = (q_min / q).powi(3);
    Ok(HValue { value: q * g, derivative: g + 0.75 * r / (s * s) })
}

/// `1 - c(q)^2 = r / (2 (1 + sqrt(1 - r)))` with `r = (q_min/q)^3`, free of
/// the cancellation in `1 - c^2` for large `q`.
fn one_minus_c_squared(q: f64, q_min: f64) -> Result<f64> {
    c_squared_of_q(q, q_min)?;
    let r = (q_min / q).powi(3);
    Ok(0.5 * r / (1.0 + (1.0 - r).max(0.0).sqrt()))
}

/// [`quartic_exponent_unit`] written in terms of `s = 1 - u`.
fn exponent_from_gap(s: f64) -> f64 {
    (1.0 - s) / s + 2.0 * s.ln()
}

/// Central-difference derivative of `h` with step `rel_step * q`; needs
/// `q - step >= q_min`.
pub fn h_derivative_central(q: f64, q_min: f64, rel_step: f64) -> Result<f64> {
    let h = rel_step * q;
    Ok((h_of_q(q + h, q_min)?.value - h_of_q(q - h, q_min)?.value) / (2.0 * h))
}

/// `h` with `c(q)` frozen at `c(q_bar)` beyond the cutoff `q_bar`.
pub fn h_weighted(q: f64, q_min: f64, q_bar: f64) -> Result<f64> {
    if !(q_bar >= q_min) {
        return Err(Error::Domain(format!("need q_min <= q_bar (q_min = {q_min}, q_bar = {q_bar})")));
    }
    if q < q_min {
        return Err(Error::Domain(format!("q = {q} is below q_min = {q_min}")));
    }
    Ok(q * exponent_from_gap(one_minus_c_squared(q.min(q_bar), q_min)?))
}

/// Slope of [`h_weighted`] beyond `q_bar`.
pub fn h_weighted_slope(q_min: f64, q_bar: f64) -> Result<f64> {
    Ok(exponent_from_gap(one_minus_c_squared(q_bar, q_min)?))
}

/// `alpha = ell^9 / (T eps^4) * 4 / q_min^3`, of dimension length^4.
pub fn alpha_from_scales(ell: f64, t: f64, eps: f64, q_min: f64) -> Result<f64> {
    for (name, v) in [("ell", ell), ("T", t), ("eps", eps), ("q_min", q_min)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} = {v} must be positive")));
        }
    }
    // length^9 / (length * length^4) = length^4
    Ok(ell.powi(9) / (t * eps.powi(4)) * 4.0 / q_min.powi(3))
}

// ---------------------------------------------------------------------------
// Exponential example
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpExample {
    pub value: f64,
    /// `1/(1 - beta)` in scaled mode.
    pub limit: Option<f64>,
    /// Estimated absolute error.
    pub error: f64,
}

/// Haar expectation of `exp(beta |U_11|^2)` as a series (`scaled = false`),
/// or of `exp(beta N |U_11|^2)` by quadrature together with its large-N
/// limit (`scaled = true`, needs `beta < 1`).
pub fn exp_linear_example(beta: f64, n: usize, scaled: bool) -> Result<ExpExample> {
    if n < 2 {
        return Err(Error::ReductionDomain { n, q: 1 });
    }
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta = {beta} must be finite")));
    }
    if scaled {
        if !(beta < 1.0) {
            return Err(Error::GeometricRegime(beta));
        }
        let f = DiscIntegrand::Exponential { radial: beta * n as f64, linear: Complex64::new(0.0, 0.0) };
        let r = reduced_integral_q1(&f, n, Normalization::Exact, &QuadOptions::relative(1e-12))?;
        let value = r.value.to_f64();
        return Ok(ExpExample { value, limit: Some(1.0 / (1.0 - beta)), error: r.rel_error * value.abs() });
    }
    // term_{p+1} = term_p * beta / (N + p)
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut p = 0usize;
    while term.abs() > f64::EPSILON * 1e-2 * sum.abs() || (p as f64) < beta.abs() {
        term *= beta / (n + p) as f64;
        sum += term;
        p += 1;
        if p > 100_000 {
            return Err(Error::NoConvergence("exponential series".into()));
        }
    }
    Ok(ExpExample { value: sum, limit: None, error: f64::EPSILON * sum.abs() * p as f64 })
}

/// `h'(q_min)`, the slope of `h` at its left endpoint.
pub const H_PRIME_AT_Q_MIN: f64 = 4.0 - 2.0 * LN_2;
