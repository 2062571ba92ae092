//! Monte Carlo estimation of single and double Haar integrals of block
//! functionals.
//!
//! Every sample is carried as a pair `(w, x)` standing for `w * exp(x)`, so
//! exponential integrands whose values span hundreds of e-folds are averaged
//! without overflow. Samples are processed in fixed-size chunks, each with its
//! own window of the random stream; chunk statistics are merged in chunk order,
//! which makes results bit-identical for any number of worker threads.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{sample_ball_uniform, sample_isometry, RngStream};
use crate::logvalue::LogValue;
use crate::matrix::{log_det_one_minus_gram, ComplexMatrix};
use crate::reduction::{ball_log_volume, normalization_constant};
use crate::saddle::t_functional;

/// Default number of samples per chunk.
pub const DEFAULT_CHUNK: usize = 4096;
/// Default sample count for single integrals.
pub const DEFAULT_SINGLE_SAMPLES: u64 = 100_000;
/// Default sample count for double integrals.
pub const DEFAULT_DOUBLE_SAMPLES: u64 = 1_000_000;

/// Largest exponent that `f64::exp` represents.
const MAX_EXP: f64 = 709.0;

pub type BlockFn = Arc<dyn Fn(&ComplexMatrix) -> Complex64 + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&ComplexMatrix, &ComplexMatrix) -> Complex64 + Send + Sync>;

/// A product of entries of `U` and of their conjugates, indices 1-based
/// `(row, col)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialPattern {
    pub plain: Vec<(usize, usize)>,
    pub conjugated: Vec<(usize, usize)>,
}

impl MonomialPattern {
    pub fn new(plain: Vec<(usize, usize)>, conjugated: Vec<(usize, usize)>) -> Self {
        MonomialPattern { plain, conjugated }
    }

    /// `|U^i_j|^2`.
    pub fn abs_sq(i: usize, j: usize) -> Self {
        Self::new(vec![(i, j)], vec![(i, j)])
    }

    /// Whether row and column indices of the plain and conjugated factors
    /// agree as multisets. Otherwise diagonal phase rotations force the
    /// moment to vanish.
    pub fn is_balanced(&self) -> bool {
        let sorted = |v: &[(usize, usize)], pick: fn(&(usize, usize)) -> usize| {
            let mut out: Vec<usize> = v.iter().map(pick).collect();
            out.sort_unstable();
            out
        };
        self.plain.len() == self.conjugated.len()
            && sorted(&self.plain, |p| p.0) == sorted(&self.conjugated, |p| p.0)
            && sorted(&self.plain, |p| p.1) == sorted(&self.conjugated, |p| p.1)
    }

    fn indices(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.plain.iter().chain(&self.conjugated)
    }

    pub fn max_row(&self) -> usize {
        self.indices().map(|p| p.0).max().unwrap_or(0)
    }

    pub fn max_col(&self) -> usize {
        self.indices().map(|p| p.1).max().unwrap_or(0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for &(i, j) in self.indices() {
            for idx in [i, j] {
                if idx == 0 || idx > n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
        }
        Ok(())
    }

    /// Evaluates the monomial on the entries of `m`.
    pub fn eval(&self, m: &ComplexMatrix) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &(i, j) in &self.plain {
            acc *= m.get(i - 1, j - 1);
        }
        for &(i, j) in &self.conjugated {
            acc *= m.get(i - 1, j - 1).conj();
        }
        acc
    }
}

/// Declarative description of an integrand.
#[derive(Clone)]
pub enum IntegrandSpec {
    Constant(f64),
    /// Entries of the full unitary, not only of the block.
    Monomial(MonomialPattern),
    /// `exp(scale * Re Tr(A Y))`.
    ExpLinear { y: ComplexMatrix, scale: f64 },
    /// `exp(scale * beta * T(A, B))`; on a single block `B = A`.
    ExpQuartic { beta: f64, scale: f64 },
    /// `det(1 - A*A)^power`; on a pair, the product over both blocks.
    DetPower { power: f64 },
    Callback(BlockFn),
    PairCallback(PairFn),
}

impl IntegrandSpec {
    pub fn callback(f: impl Fn(&ComplexMatrix) -> Complex64 + Send + Sync + 'static) -> Self {
        IntegrandSpec::Callback(Arc::new(f))
    }

    pub fn real_callback(f: impl Fn(&ComplexMatrix) -> f64 + Send + Sync + 'static) -> Self {
        IntegrandSpec::Callback(Arc::new(move |a| Complex64::new(f(a), 0.0)))
    }

    pub fn pair_callback(f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> Complex64 + Send + Sync + 'static) -> Self {
        IntegrandSpec::PairCallback(Arc::new(f))
    }

    /// `exp(beta N T(A_<, A_>))`.
    pub fn exp_quartic(beta: f64, n: usize) -> Self {
        IntegrandSpec::ExpQuartic { beta, scale: n as f64 }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            IntegrandSpec::Constant(_) => "constant",
            IntegrandSpec::Monomial(_) => "monomial",
            IntegrandSpec::ExpLinear { .. } => "exp-linear",
            IntegrandSpec::ExpQuartic { .. } => "exp-quartic",
            IntegrandSpec::DetPower { .. } => "det-power",
            IntegrandSpec::Callback(_) => "callback",
            IntegrandSpec::PairCallback(_) => "pair-callback",
        }
    }

    fn validate(&self, n: usize, q: usize) -> Result<()> {
        match self {
            IntegrandSpec::Monomial(p) => p.validate(n),
            IntegrandSpec::ExpLinear { y, .. } if y.rows() != q || y.cols() != q => Err(Error::DimensionMismatch(
                format!("Y is {}x{} but the block is {q}x{q}", y.rows(), y.cols()),
            )),
            IntegrandSpec::ExpQuartic { beta, .. } if !(*beta > 0.0) => {
                Err(Error::Domain(format!("exp-quartic needs beta > 0, got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// `(w, x)` with value `w * exp(x)` on a single block. `full` holds the
    /// sampled columns of `U` for monomials.
    pub(crate) fn log_eval_single(&self, a: &ComplexMatrix, full: &ComplexMatrix) -> Result<(Complex64, f64)> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            IntegrandSpec::Constant(c) => (Complex64::new(*c, 0.0), 0.0),
            IntegrandSpec::Monomial(p) => (p.eval(full), 0.0),
            IntegrandSpec::ExpLinear { y, scale } => (one, scale * (a * y).trace().re),
            IntegrandSpec::ExpQuartic { beta, scale } => (one, scale * beta * t_functional(a, a)?),
            IntegrandSpec::DetPower { power } => (one, log_det_power(a, *power)),
            IntegrandSpec::Callback(f) => (f(a), 0.0),
            IntegrandSpec::PairCallback(_) => {
                return Err(Error::InvalidPattern("a pair integrand needs integrate_double".into()))
            }
        })
    }

    fn log_eval_pair(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(Complex64, f64)> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match self {
            IntegrandSpec::Constant(c) => (Complex64::new(*c, 0.0), 0.0),
            IntegrandSpec::ExpQuartic { beta, scale } => (one, scale * beta * t_functional(a, b)?),
            IntegrandSpec::DetPower { power } => (one, log_det_power(a, *power) + log_det_power(b, *power)),
            IntegrandSpec::PairCallback(f) => (f(a, b), 0.0),
            other => {
                return Err(Error::InvalidPattern(format!("{} is not a functional of two blocks", other.kind())))
            }
        })
    }
}

/// `power * log det(1 - A*A)`, with `-inf` on the ball boundary.
fn log_det_power(a: &ComplexMatrix, power: f64) -> f64 {
    if power == 0.0 {
        return 0.0;
    }
    match log_det_one_minus_gram(a, power) {
        Ok(v) => v.log_magnitude(),
        Err(_) if power > 0.0 => f64::NEG_INFINITY,
        Err(_) => f64::INFINITY,
    }
}

impl fmt::Debug for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrandSpec::Constant(c) => write!(f, "Constant({c})"),
            IntegrandSpec::Monomial(p) => write!(f, "Monomial({p:?})"),
            IntegrandSpec::ExpLinear { y, scale } => write!(f, "ExpLinear {{ y: {y:?}, scale: {scale} }}"),
            IntegrandSpec::ExpQuartic { beta, scale } => write!(f, "ExpQuartic {{ beta: {beta}, scale: {scale} }}"),
            IntegrandSpec::DetPower { power } => write!(f, "DetPower {{ power: {power} }}"),
            IntegrandSpec::Callback(_) => write!(f, "Callback(..)"),
            IntegrandSpec::PairCallback(_) => write!(f, "PairCallback(..)"),
        }
    }
}

/// How the exponent shift `s` is chosen; the estimate is of `E[f] e^{-s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// No shift. Fails with an overflow error carrying a suggested shift.
    None,
    Fixed(f64),
    /// The largest sampled exponent.
    Auto,
}

/// Distribution the blocks are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockSampling {
    /// Blocks of Haar unitaries.
    Haar,
    /// Uniform points of the ball, reweighted by the block density. Reaches
    /// regions that Haar sampling essentially never visits.
    Ball,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n_samples: u64,
    pub stream: RngStream,
    pub shift: ShiftMode,
    pub sampling: BlockSampling,
    pub chunk_size: usize,
}

impl McOptions {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        McOptions {
            n_samples,
            stream: RngStream::new(seed, 0),
            shift: ShiftMode::None,
            sampling: BlockSampling::Haar,
            chunk_size: DEFAULT_CHUNK,
        }
    }

    pub fn with_stream(mut self, stream: RngStream) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_shift(mut self, shift: ShiftMode) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_sampling(mut self, sampling: BlockSampling) -> Self {
        self.sampling = sampling;
        self
    }
}

/// Result of a Monte Carlo run. `mean` and `std_error` are scaled by
/// `exp(-shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: RngStream,
    pub shift: f64,
}

impl McEstimate {
    /// An exact value, reported without sampling.
    pub fn exact(value: Complex64, seed: RngStream) -> Self {
        McEstimate { mean: value, std_error: 0.0, n_samples: 0, seed, shift: 0.0 }
    }

    /// The unshifted mean as a log-domain value.
    pub fn log_mean(&self) -> LogValue {
        LogValue::from_complex(self.mean) * LogValue::from_log(self.shift)
    }

    /// Distance from `reference` (already scaled by `exp(-shift)`) in
    /// standard errors.
    pub fn z_score(&self, reference: Complex64) -> f64 {
        let gap = (self.mean - reference).norm();
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            gap / self.std_error
        }
    }

    pub fn within_sigma(&self, reference: Complex64, k: f64) -> bool {
        (self.mean - reference).norm() <= k * self.std_error
    }
}

/// Mean and second central moment of a run of samples, both relative to
/// `exp(m)`.
#[derive(Clone, Copy, Debug)]
struct ChunkStats {
    n: u64,
    m: f64,
    mean: Complex64,
    m2: f64,
}

impl ChunkStats {
    fn from_samples(samples: &[(Complex64, f64)]) -> Self {
        let n = samples.len() as u64;
        let m = samples
            .iter()
            .filter(|(w, x)| *w != Complex64::new(0.0, 0.0) && *x > f64::NEG_INFINITY)
            .map(|s| s.1)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return ChunkStats { n, m, mean: Complex64::new(0.0, 0.0), m2: 0.0 };
        }
        let rel = |(w, x): &(Complex64, f64)| if *x == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { w * (x - m).exp() };
        let mean = samples.iter().map(rel).sum::<Complex64>() / n as f64;
        let m2 = samples.iter().map(|s| (rel(s) - mean).norm_sqr()).sum();
        ChunkStats { n, m, mean, m2 }
    }

    fn rescaled(&self, to: f64) -> (Complex64, f64) {
        if self.m == f64::NEG_INFINITY {
            return (Complex64::new(0.0, 0.0), 0.0);
        }
        let s = (self.m - to).exp();
        (self.mean * s, self.m2 * s * s)
    }

    fn combine(self, other: ChunkStats) -> ChunkStats {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let m = self.m.max(other.m);
        let n = self.n + other.n;
        if m == f64::NEG_INFINITY {
            return ChunkStats { n, m, mean: Complex64::new(0.0, 0.0), m2: 0.0 };
        }
        let (ma, m2a) = self.rescaled(m);
        let (mb, m2b) = other.rescaled(m);
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        let delta = mb - ma;
        ChunkStats { n, m, mean: ma + delta * (nb / nf), m2: m2a + m2b + delta.norm_sqr() * na * nb / nf }
    }
}

/// Random sources available to one chunk.
pub struct ChunkRngs {
    pub primary: ChaCha20Rng,
    pub companion: ChaCha20Rng,
}

/// Averages `draw` over `opts.n_samples` samples in log-domain form.
///
/// `draw` returns `(w, x)` meaning `w * exp(x)`; it must be a pure function of
/// the random sources it is handed.
pub fn integrate_log_samples<F>(opts: &McOptions, draw: F) -> Result<McEstimate>
where
    F: Fn(&mut ChunkRngs) -> Result<(Complex64, f64)> + Sync,
{
    let n = opts.n_samples;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let chunk = opts.chunk_size.max(1) as u64;
    let n_chunks = n.div_ceil(chunk);
    let companion = opts.stream.companion();
    let stats: Vec<Result<ChunkStats>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rngs = ChunkRngs { primary: opts.stream.chunk_rng(c), companion: companion.chunk_rng(c) };
            let start = c * chunk;
            let len = chunk.min(n - start);
            let mut samples = Vec::with_capacity(len as usize);
            for k in 0..len {
                let (w, x) = draw(&mut rngs)?;
                if !(w.re.is_finite() && w.im.is_finite()) || x.is_nan() || x == f64::INFINITY {
                    return Err(Error::NonFinite { index: start + k });
                }
                samples.push((w, x));
            }
            Ok(ChunkStats::from_samples(&samples))
        })
        .collect();
    let mut total = ChunkStats { n: 0, m: f64::NEG_INFINITY, mean: Complex64::new(0.0, 0.0), m2: 0.0 };
    for s in stats {
        total = total.combine(s?);
    }
    finish(total, opts)
}

fn finish(total: ChunkStats, opts: &McOptions) -> Result<McEstimate> {
    let m = total.m;
    let shift = match opts.shift {
        ShiftMode::None => 0.0,
        ShiftMode::Fixed(s) => s,
        ShiftMode::Auto if m.is_finite() => m,
        ShiftMode::Auto => 0.0,
    };
    let factor = if m == f64::NEG_INFINITY {
        0.0
    } else {
        let excess = m - shift;
        if excess > MAX_EXP {
            return Err(Error::ExponentOverflow { excess, suggested_shift: m });
        }
        excess.exp()
    };
    let nf = total.n as f64;
    let var = total.m2 / (nf - 1.0);
    Ok(McEstimate {
        mean: total.mean * factor,
        std_error: (var / nf).sqrt() * factor,
        n_samples: total.n,
        seed: opts.stream,
        shift,
    })
}

/// Log of the density ratio between the block distribution and the uniform
/// distribution on the ball.
struct BallWeight {
    power: f64,
    log_ratio: f64,
}

impl BallWeight {
    fn new(n: usize, q: usize) -> Result<Self> {
        let k = normalization_constant(n, q)?;
        Ok(BallWeight {
            power: (n - 2 * q) as f64,
            log_ratio: ball_log_volume(q)? - k.value.log_magnitude(),
        })
    }

    fn log_weight(&self, a: &ComplexMatrix) -> f64 {
        log_det_power(a, self.power) + self.log_ratio
    }
}

enum BlockSource {
    Haar { n: usize, q: usize, columns: usize },
    Ball { q: usize, weight: BallWeight },
}

impl BlockSource {
    fn new(spec: &IntegrandSpec, n: usize, q: usize, sampling: BlockSampling) -> Result<Self> {
        let monomial_cols = match spec {
            IntegrandSpec::Monomial(p) => p.max_col(),
            _ => 0,
        };
        match sampling {
            BlockSampling::Haar => Ok(BlockSource::Haar { n, q, columns: q.max(monomial_cols) }),
            BlockSampling::Ball => {
                if let IntegrandSpec::Monomial(p) = spec {
                    if p.max_row() > q || p.max_col() > q {
                        return Err(Error::InvalidPattern(
                            "ball sampling only sees the block; monomial indices must not exceed q".into(),
                        ));
                    }
                }
                Ok(BlockSource::Ball { q, weight: BallWeight::new(n, q)? })
            }
        }
    }

    /// Returns `(block, sampled columns, log weight)`.
    fn draw(&self, rng: &mut ChaCha20Rng) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
        match self {
            BlockSource::Haar { n, q, columns } => {
                let v = sample_isometry(*n, *columns, rng)?;
                Ok((v.submatrix(0, 0, *q, *q), v, 0.0))
            }
            BlockSource::Ball { q, weight } => {
                let a = sample_ball_uniform(*q, rng)?;
                let lw = weight.log_weight(&a);
                Ok((a.clone(), a, lw))
            }
        }
    }
}

fn check_dims(n: usize, q: usize, sampling: BlockSampling) -> Result<()> {
    if n == 0 || q == 0 {
        return Err(Error::EmptyDimension);
    }
    if q > n {
        return Err(Error::DimensionMismatch(format!("block size q = {q} exceeds N = {n}")));
    }
    if sampling == BlockSampling::Ball && n < 2 * q {
        return Err(Error::ReductionDomain { n, q });
    }
    Ok(())
}

/// Estimates the Haar expectation of `f(A)` with `A` the leading `q x q`
/// block of `U` in `U(n)`.
pub fn integrate_single(f: &IntegrandSpec, n: usize, q: usize, opts: &McOptions) -> Result<McEstimate> {
    check_dims(n, q, opts.sampling)?;
    f.validate(n, q)?;
    if opts.n_samples < 2 {
        return Err(Error::TooFewSamples(opts.n_samples));
    }
    if let IntegrandSpec::Constant(c) = f {
        return Ok(McEstimate {
            mean: Complex64::new(*c, 0.0),
            std_error: 0.0,
            n_samples: opts.n_samples,
            seed: opts.stream,
            shift: 0.0,
        });
    }
    let source = BlockSource::new(f, n, q, opts.sampling)?;
    integrate_log_samples(opts, |rngs| {
        let (a, full, lw) = source.draw(&mut rngs.primary)?;
        let (w, x) = f.log_eval_single(&a, &full)?;
        Ok((w, x + lw))
    })
}

/// Estimates the double integral over independent Haar unitaries `U_<`, `U_>`
/// of `g(A_<, A_>)`. The two blocks use independent streams.
pub fn integrate_double(g: &IntegrandSpec, n: usize, q: usize, opts: &McOptions) -> Result<McEstimate> {
    check_dims(n, q, opts.sampling)?;
    g.validate(n, q)?;
    if opts.n_samples < 2 {
        return Err(Error::TooFewSamples(opts.n_samples));
    }
    if let IntegrandSpec::Constant(c) = g {
        return Ok(McEstimate {
            mean: Complex64::new(*c, 0.0),
            std_error: 0.0,
            n_samples: opts.n_samples,
            seed: opts.stream,
            shift: 0.0,
        });
    }
    if matches!(g, IntegrandSpec::Monomial(_)) {
        return Err(Error::InvalidPattern("monomials are single-block integrands".into()));
    }
    let source = BlockSource::new(g, n, q, opts.sampling)?;
    integrate_log_samples(opts, |rngs| {
        let (a, _, la) = source.draw(&mut rngs.primary)?;
        let (b, _, lb) = source.draw(&mut rngs.companion)?;
        let (w, x) = g.log_eval_pair(&a, &b)?;
        Ok((w, x + la + lb))
    })
}

/// Mixed moment of Haar entries. Unbalanced patterns vanish by phase
/// invariance and are returned as an exact zero without sampling.
pub fn moment_monomial(pattern: &MonomialPattern, n: usize, opts: &McOptions) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    pattern.validate(n)?;
    if !pattern.is_balanced() {
        return Ok(McEstimate::exact(Complex64::new(0.0, 0.0), opts.stream));
    }
    let haar = McOptions { sampling: BlockSampling::Haar, ..*opts };
    integrate_single(&IntegrandSpec::Monomial(pattern.clone()), n, 1, &haar)
}
