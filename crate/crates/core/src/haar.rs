//! Haar-distributed unitaries, their column isometries and subspace blocks.
//!
//! Columns of a complex Gaussian matrix are orthonormalized by Gram-Schmidt
//! (two passes, for stability). Gram-Schmidt produces the `Q` of a QR
//! factorization whose `R` has a positive real diagonal, which is exactly the
//! phase-corrected construction that yields Haar measure. Because the first
//! `k` columns of a Haar unitary are themselves a Haar isometry, callers that
//! only need a `q x q` block draw `N x q` columns instead of the full matrix.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Word offset between the substreams of consecutive chunks.
const CHUNK_WORD_STRIDE: u128 = 1 << 40;

/// Tag mixed into the stream id for the second, independent factor of a
/// double integral.
const COMPANION_TAG: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seed provenance of every random draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha20Rng {
        self.chunk_rng(0)
    }

    /// Generator for chunk `chunk` of a chunked computation. Chunks occupy
    /// disjoint windows of the same ChaCha stream, so the draws do not depend
    /// on how chunks are assigned to workers.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(chunk as u128 * CHUNK_WORD_STRIDE);
        rng
    }

    /// A second stream for an independent factor.
    pub fn companion(&self) -> RngStream {
        RngStream { seed: self.seed, stream_id: self.stream_id ^ COMPANION_TAG }
    }

    pub fn with_stream_id(&self, stream_id: u64) -> RngStream {
        RngStream { seed: self.seed, stream_id }
    }
}

/// Which blocks to extract: the leading `q x q` block `A` and optionally the
/// next `p x p` diagonal block `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub q: usize,
    pub p: Option<usize>,
}

impl BlockSpec {
    pub fn single(q: usize) -> Self {
        BlockSpec { q, p: None }
    }

    pub fn pair(q: usize, p: usize) -> Self {
        BlockSpec { q, p: Some(p) }
    }

    /// Number of leading columns of `U` the blocks depend on.
    pub fn columns(&self) -> usize {
        self.q + self.p.unwrap_or(0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.q == 0 || self.p == Some(0) {
            return Err(Error::EmptyDimension);
        }
        match self.p {
            None if self.q > n => {
                Err(Error::DimensionMismatch(format!("block size q = {} exceeds N = {n}", self.q)))
            }
            Some(p) if 2 * (p + self.q) > n => Err(Error::DimensionMismatch(format!(
                "orthogonal blocks need 2(p+q) <= N (p = {p}, q = {}, N = {n})",
                self.q
            ))),
            _ => Ok(()),
        }
    }
}

/// Blocks cut out of a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub a: ComplexMatrix,
    pub d: Option<ComplexMatrix>,
}

/// A standard complex Gaussian, `E|z|^2 = 1`.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of independent standard complex Gaussians, drawn in
/// column-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let mut entries = vec![Complex64::new(0.0, 0.0); rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            entries[i * cols + j] = standard_complex_gaussian(rng);
        }
    }
    ComplexMatrix::from_row_major(rows, cols, entries).expect("sizes agree")
}

fn isometry_columns<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<Complex64>>> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyDimension);
    }
    if k > n {
        return Err(Error::DimensionMismatch(format!("cannot draw {k} orthonormal columns in dimension {n}")));
    }
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut v: Vec<Complex64> = (0..n).map(|_| standard_complex_gaussian(rng)).collect();
        for _pass in 0..2 {
            for q in &cols {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NoConvergence("degenerate Gaussian column".into()));
        }
        let inv = 1.0 / norm;
        v.iter_mut().for_each(|z| *z *= inv);
        cols.push(v);
    }
    Ok(cols)
}

/// First `k` columns of a Haar unitary on `C^n`.
pub fn sample_isometry<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<ComplexMatrix> {
    let cols = isometry_columns(n, k, rng)?;
    Ok(ComplexMatrix::from_fn(n, k, |i, j| cols[j][i]))
}

/// A Haar-distributed element of `U(n)`.
pub fn sample_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    sample_isometry(n, n, rng)
}

/// Extracts the blocks named by `spec` from `u`, which may be a full unitary
/// or any isometry with enough leading columns.
pub fn block(u: &ComplexMatrix, spec: BlockSpec) -> Result<Blocks> {
    let need = spec.columns();
    if spec.q == 0 || spec.p == Some(0) {
        return Err(Error::EmptyDimension);
    }
    if u.rows() < need || u.cols() < need {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is too small for blocks of total size {need}",
            u.rows(),
            u.cols()
        )));
    }
    let a = u.submatrix(0, 0, spec.q, spec.q);
    let d = spec.p.map(|p| u.submatrix(spec.q, spec.q, p, p));
    Ok(Blocks { a, d })
}

/// Draws the blocks of a Haar unitary of size `n` without forming the whole
/// matrix.
pub fn sample_blocks<R: Rng + ?Sized>(n: usize, spec: BlockSpec, rng: &mut R) -> Result<Blocks> {
    spec.validate(n)?;
    let v = sample_isometry(n, spec.columns(), rng)?;
    block(&v, spec)
}

/// Uniform sample from the ball `{A : A*A < 1}` of `q x q` matrices, by
/// rejection from the Euclidean ball of radius `sqrt(q)` in `R^{2q^2}`.
pub fn sample_ball_uniform<R: Rng + ?Sized>(q: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if q == 0 {
        return Err(Error::EmptyDimension);
    }
    if q == 1 {
        let u: f64 = rng.random();
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        return Ok(ComplexMatrix::from_fn(1, 1, |_, _| Complex64::from_polar(u.sqrt(), phi)));
    }
    let dim = (2 * q * q) as f64;
    loop {
        let g = gaussian_matrix(q, q, rng);
        let r = (q as f64).sqrt() * rng.random::<f64>().powf(1.0 / dim);
        let cand = g.scale(r / g.frobenius_norm());
        if cand.in_ball() {
            return Ok(cand);
        }
    }
}

/// Per-worker sampler bound to a stream.
pub struct HaarSampler {
    n: usize,
    stream: RngStream,
    rng: ChaCha20Rng,
}

impl HaarSampler {
    pub fn new(n: usize, stream: RngStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(HaarSampler { n, stream, rng: stream.rng() })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    pub fn unitary(&mut self) -> ComplexMatrix {
        sample_unitary(self.n, &mut self.rng).expect("dimension checked at construction")
    }

    pub fn isometry(&mut self, k: usize) -> Result<ComplexMatrix> {
        sample_isometry(self.n, k, &mut self.rng)
    }

    pub fn blocks(&mut self, spec: BlockSpec) -> Result<Blocks> {
        sample_blocks(self.n, spec, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_bits() {
        let s = RngStream::new(42, 3);
        let a = sample_unitary(5, &mut s.rng()).unwrap();
        let b = sample_unitary(5, &mut s.rng()).unwrap();
        assert_eq!(a, b);
        let c = sample_unitary(5, &mut s.with_stream_id(4).rng()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn isometry_is_prefix_of_unitary() {
        let s = RngStream::new(1, 0);
        let u = sample_unitary(6, &mut s.rng()).unwrap();
        let v = sample_isometry(6, 2, &mut s.rng()).unwrap();
        assert_eq!(u.submatrix(0, 0, 6, 2), v);
    }

    #[test]
    fn unitarity_residual_is_tiny() {
        let mut rng = RngStream::new(9, 0).rng();
        for n in [1usize, 2, 7, 64, 200] {
            let u = sample_unitary(n, &mut rng).unwrap();
            assert!(u.unitarity_residual() <= 1e-12 * n as f64, "n = {n}");
        }
    }

    #[test]
    fn one_by_one_is_a_phase() {
        let u = sample_unitary(1, &mut RngStream::new(5, 0).rng()).unwrap();
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_dimension_rejected() {
        assert_eq!(sample_unitary(0, &mut RngStream::new(0, 0).rng()), Err(Error::EmptyDimension));
    }

    #[test]
    fn block_extraction() {
        let id = ComplexMatrix::identity(4);
        assert_eq!(block(&id, BlockSpec::single(2)).unwrap().a, ComplexMatrix::identity(2));
        let u = sample_unitary(3, &mut RngStream::new(2, 0).rng()).unwrap();
        let full = block(&u, BlockSpec::single(3)).unwrap().a;
        assert_eq!(full, u);
        assert!((full.sigma_max().unwrap() - 1.0).abs() < 1e-12);
        let b = block(&u, BlockSpec::pair(1, 1)).unwrap();
        assert_eq!(b.d.unwrap().get(0, 0), u.get(1, 1));
        assert!(BlockSpec::pair(2, 2).validate(7).is_err());
        assert!(BlockSpec::pair(2, 2).validate(8).is_ok());
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut rng = RngStream::new(3, 0).rng();
        for q in 1..=3 {
            for _ in 0..20 {
                assert!(sample_ball_uniform(q, &mut rng).unwrap().in_ball());
            }
        }
    }

    #[test]
    fn chunks_are_disjoint_windows() {
        let s = RngStream::new(7, 0);
        let x: u64 = s.chunk_rng(0).random();
        let y: u64 = s.chunk_rng(1).random();
        assert_ne!(x, y);
    }
}
