//! Large-N asymptotics: the leading pairing rule for mixed moments, the
//! Gaussian limit of homogeneous block functionals, and factorization over
//! orthogonal subspaces.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{gaussian_matrix, sample_isometry, RngStream};
use crate::logvalue::LogValue;
use crate::matrix::{log_coupling_det, ComplexMatrix};
use crate::mc::{integrate_log_samples, integrate_single, BlockSampling, IntegrandSpec, McEstimate, McOptions, MonomialPattern};
use crate::reduction::normalization_constant;

/// Largest `p` for which permutations are enumerated.
pub const ENUMERATION_CAP: usize = 8;

const PROBE_TAG: u64 = 0x5851_f42d_4c95_7f2d;
const PROBES: usize = 3;

/// `prod_m U^{i_m}_{j_m} (U^{-1})^{k_m}_{l_m}`, indices 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingPattern {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub k: Vec<usize>,
    pub l: Vec<usize>,
}

impl PairingPattern {
    pub fn new(i: Vec<usize>, j: Vec<usize>, k: Vec<usize>, l: Vec<usize>) -> Result<Self> {
        let p = i.len();
        if p == 0 {
            return Err(Error::InvalidPattern("a pattern needs at least one factor".into()));
        }
        if j.len() != p || k.len() != p || l.len() != p {
            return Err(Error::InvalidPattern("index lists must have equal length".into()));
        }
        if p > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { p, cap: ENUMERATION_CAP });
        }
        if let Some(&z) = i.iter().chain(&j).chain(&k).chain(&l).find(|&&x| x == 0) {
            return Err(Error::IndexOutOfRange { index: z, n: 0 });
        }
        Ok(PairingPattern { i, j, k, l })
    }

    pub fn p(&self) -> usize {
        self.i.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for &x in self.i.iter().chain(&self.j).chain(&self.k).chain(&self.l) {
            if x == 0 || x > n {
                return Err(Error::IndexOutOfRange { index: x, n });
            }
        }
        Ok(())
    }

    /// The same product written with entries of `U` only, using
    /// `(U^{-1})^k_l = conj(U^l_k)`.
    pub fn to_monomial(&self) -> MonomialPattern {
        MonomialPattern::new(
            self.i.iter().copied().zip(self.j.iter().copied()).collect(),
            self.l.iter().copied().zip(self.k.iter().copied()).collect(),
        )
    }

    /// Number of permutations with `i_m = l_{sigma(m)}` and
    /// `k_{sigma(m)} = j_m` for all `m`.
    pub fn pairing_count(&self) -> u64 {
        fn go(p: &PairingPattern, m: usize, used: &mut [bool]) -> u64 {
            if m == p.p() {
                return 1;
            }
            let mut total = 0;
            for s in 0..p.p() {
                if !used[s] && p.l[s] == p.i[m] && p.k[s] == p.j[m] {
                    used[s] = true;
                    total += go(p, m + 1, used);
                    used[s] = false;
                }
            }
            total
        }
        go(self, 0, &mut vec![false; self.p()])
    }
}

/// Leading large-N value of the mixed moment: the number of admissible
/// pairings divided by `N^p`.
pub fn weingarten_leading(pattern: &PairingPattern, n: usize) -> Result<f64> {
    if pattern.p() > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { p: pattern.p(), cap: ENUMERATION_CAP });
    }
    pattern.validate(n)?;
    Ok(pattern.pairing_count() as f64 / (n as f64).powi(pattern.p() as i32))
}

/// A block functional declared homogeneous of some degree.
#[derive(Clone)]
pub struct HomogeneousIntegrand {
    pub degree: u32,
    pub f: Arc<dyn Fn(&ComplexMatrix) -> Complex64 + Send + Sync>,
}

impl HomogeneousIntegrand {
    pub fn new(degree: u32, f: impl Fn(&ComplexMatrix) -> Complex64 + Send + Sync + 'static) -> Self {
        HomogeneousIntegrand { degree, f: Arc::new(f) }
    }

    pub fn real(degree: u32, f: impl Fn(&ComplexMatrix) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(degree, move |a| Complex64::new(f(a), 0.0))
    }

    /// Checks `f(2A) = 2^d f(A)` on a few Gaussian probes.
    pub fn check(&self, q: usize, stream: RngStream) -> Result<()> {
        let mut rng = stream.with_stream_id(stream.stream_id ^ PROBE_TAG).rng();
        let scale = 2f64.powi(self.degree as i32);
        for _ in 0..PROBES {
            let a = gaussian_matrix(q, q, &mut rng);
            let base = (self.f)(&a) * scale;
            let doubled = (self.f)(&a.scale(2.0));
            let tol = 1e-8 * base.norm().max(doubled.norm()).max(f64::MIN_POSITIVE);
            if (doubled - base).norm() > tol {
                let ratio = if base.norm() == 0.0 { f64::INFINITY } else { (doubled / base).re };
                return Err(Error::HomogeneityViolation { degree: self.degree, ratio });
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for HomogeneousIntegrand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HomogeneousIntegrand {{ degree: {} }}", self.degree)
    }
}

/// Expectation of `f` over a `q x q` matrix of independent standard complex
/// Gaussians. Divided by `N^{d/2}` it is the large-N Haar expectation of
/// `f(A)`.
pub fn gaussian_expectation(f: &HomogeneousIntegrand, q: usize, opts: &McOptions) -> Result<McEstimate> {
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    f.check(q, opts.stream)?;
    integrate_log_samples(opts, |rngs| Ok(((f.f)(&gaussian_matrix(q, q, &mut rngs.primary)), 0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMode {
    /// Haar integral of `f` times the Gaussian limit of `g`.
    Product,
    /// Independent blocks reweighted by `1/det(1 - A*A (x) D*D)`.
    Coupled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizedExpectation {
    pub mode: FactorMode,
    /// Estimate scaled by `exp(-shift)`.
    pub mean: Complex64,
    pub std_error: f64,
    pub shift: f64,
    /// Coupled mode: mean of the reweighting factor `1/det(1 - A*A (x) D*D)`.
    pub reweighting: Option<McEstimate>,
}

impl FactorizedExpectation {
    pub fn log_mean(&self) -> LogValue {
        LogValue::from_complex(self.mean) * LogValue::from_log(self.shift)
    }
}

/// Haar expectation of `f(A) g(D)` for the diagonal blocks `A` (`q x q`) and
/// `D` (`p x p`) of one unitary, evaluated as if the blocks were
/// independent.
pub fn factorized_expectation(
    f: &IntegrandSpec,
    g: &HomogeneousIntegrand,
    n: usize,
    q: usize,
    p: usize,
    mode: FactorMode,
    opts: &McOptions,
) -> Result<FactorizedExpectation> {
    if p == 0 || q == 0 {
        return Err(Error::EmptyDimension);
    }
    if 2 * (p + q) > n {
        return Err(Error::DimensionMismatch(format!("orthogonal blocks need 2(p+q) <= N (p = {p}, q = {q}, N = {n})")));
    }
    g.check(p, opts.stream)?;
    let haar = McOptions { sampling: BlockSampling::Haar, ..*opts };
    match mode {
        FactorMode::Product => {
            let fa = integrate_single(f, n, q, &haar)?;
            let gopts = haar.with_stream(opts.stream.companion());
            let gd = gaussian_expectation(g, p, &gopts)?;
            let scale = (n as f64).powf(-(g.degree as f64) / 2.0);
            let gm = gd.mean * scale;
            let gs = gd.std_error * scale;
            let mean = fa.mean * gm;
            let std_error = ((fa.std_error * gm.norm()).powi(2) + (fa.mean.norm() * gs).powi(2)).sqrt();
            Ok(FactorizedExpectation { mode, mean, std_error, shift: fa.shift, reweighting: None })
        }
        FactorMode::Coupled => {
            if let IntegrandSpec::PairCallback(_) = f {
                return Err(Error::InvalidPattern("f must be a single-block functional".into()));
            }
            let pref = |k: usize| -> Result<f64> {
                Ok((k * k) as f64 * (n as f64 / std::f64::consts::PI).ln() + normalization_constant(n, k)?.value.log_magnitude())
            };
            let log_c = pref(q)? + pref(p)?;
            let draw_pair = |rngs: &mut crate::mc::ChunkRngs| -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
                let va = sample_isometry(n, q.max(monomial_cols(f)), &mut rngs.primary)?;
                let vd = sample_isometry(n, p, &mut rngs.companion)?;
                Ok((va.submatrix(0, 0, q, q), va, vd.submatrix(0, 0, p, p)))
            };
            let est = integrate_log_samples(opts, |rngs| {
                let (a, full, d) = draw_pair(rngs)?;
                let (w, x) = f.log_eval_single(&a, &full)?;
                let lc = log_coupling_det(&a, &d).unwrap_or(f64::NEG_INFINITY);
                Ok((w * (g.f)(&d), x - lc + log_c))
            })?;
            let rew = integrate_log_samples(&opts.with_shift(crate::mc::ShiftMode::None), |rngs| {
                let (a, _, d) = draw_pair(rngs)?;
                let lc = log_coupling_det(&a, &d).unwrap_or(f64::NEG_INFINITY);
                Ok((Complex64::new(1.0, 0.0), -lc))
            })?;
            Ok(FactorizedExpectation {
                mode,
                mean: est.mean,
                std_error: est.std_error,
                shift: est.shift,
                reweighting: Some(rew),
            })
        }
    }
}

fn monomial_cols(f: &IntegrandSpec) -> usize {
    match f {
        IntegrandSpec::Monomial(p) => p.max_col(),
        _ => 0,
    }
}

/// Draws a random Hermitian `q x q` matrix with Gaussian entries, useful for
/// property checks.
pub fn random_hermitian<R: Rng + ?Sized>(q: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(q, q, rng);
    (&g + &g.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weingarten_examples() {
        let p1 = PairingPattern::new(vec![1], vec![1], vec![1], vec![1]).unwrap();
        assert!((weingarten_leading(&p1, 10).unwrap() - 0.1).abs() < 1e-15);
        let p2 = PairingPattern::new(vec![1, 2], vec![1, 2], vec![1, 2], vec![1, 2]).unwrap();
        assert!((weingarten_leading(&p2, 8).unwrap() - 1.0 / 64.0).abs() < 1e-15);
        let p3 = PairingPattern::new(vec![1, 1], vec![1, 1], vec![1, 1], vec![1, 1]).unwrap();
        assert!((weingarten_leading(&p3, 8).unwrap() - 2.0 / 64.0).abs() < 1e-15);
        let big = PairingPattern::new(vec![1; 9], vec![1; 9], vec![1; 9], vec![1; 9]);
        assert_eq!(big, Err(Error::EnumerationCap { p: 9, cap: 8 }));
        let full = PairingPattern::new(vec![1; 8], vec![1; 8], vec![1; 8], vec![1; 8]).unwrap();
        assert_eq!(full.pairing_count(), 40320);
    }

    #[test]
    fn monomial_translation() {
        let p = PairingPattern::new(vec![1], vec![2], vec![3], vec![4]).unwrap();
        let m = p.to_monomial();
        assert_eq!(m.plain, vec![(1, 2)]);
        assert_eq!(m.conjugated, vec![(4, 3)]);
    }

    #[test]
    fn homogeneity_is_checked() {
        let f = HomogeneousIntegrand::real(2, |a| a.get(0, 0).norm_sqr());
        assert!(f.check(1, RngStream::new(1, 0)).is_ok());
        let wrong = HomogeneousIntegrand::real(3, |a| a.get(0, 0).norm_sqr());
        assert!(matches!(wrong.check(1, RngStream::new(1, 0)), Err(Error::HomogeneityViolation { degree: 3, .. })));
    }
}
