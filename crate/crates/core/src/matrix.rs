//! Dense complex matrices and the determinant identities used throughout the
//! reductions.
//!
//! [`ComplexMatrix`] is a thin value type over `nalgebra`'s `DMatrix`. The
//! decompositions return eigenvalues and singular values in ascending order,
//! ties broken by original index, so that every downstream result is
//! reproducible.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;

/// Tolerance below 1 that the largest singular value must clear for a matrix
/// to count as a member of the open ball.
pub const BALL_MARGIN: f64 = 1e-14;

const DECOMP_EPS: f64 = 1e-15;
const DECOMP_MAX_ITER: usize = 10_000;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRecord", try_from = "MatrixRecord")]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

/// Wire form: dimensions plus row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<ComplexMatrix> for MatrixRecord {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRecord {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries_row_major().into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixRecord> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRecord) -> Result<Self> {
        let entries = r.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::from_row_major(r.rows, r.cols, entries)
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { inner: DMatrix::from_row_slice(rows, cols, &entries) })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        ComplexMatrix { inner: DMatrix::from_fn(rows, cols, f) }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        ComplexMatrix { inner: DMatrix::identity(n, n) }
    }

    pub fn scaled_identity(n: usize, c: f64) -> Self {
        Self::identity(n).scale(c)
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_nalgebra(inner: DMatrix<Complex64>) -> Self {
        ComplexMatrix { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entry at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.inner[(row, col)] = value;
    }

    pub fn entries_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix { inner: self.inner.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix { inner: self.inner.transpose() }
    }

    pub fn scale(&self, c: f64) -> Self {
        ComplexMatrix { inner: self.inner.map(|z| z * c) }
    }

    pub fn scale_complex(&self, c: Complex64) -> Self {
        ComplexMatrix { inner: self.inner.map(|z| z * c) }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows().min(self.cols())).map(|i| self.inner[(i, i)]).collect()
    }

    /// Leading `rows x cols` submatrix.
    pub fn submatrix(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        ComplexMatrix { inner: self.inner.view((row0, col0), (rows, cols)).into_owned() }
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A* A`.
    pub fn gram(&self) -> Self {
        ComplexMatrix { inner: self.inner.adjoint() * &self.inner }
    }

    /// `max |(U*U - 1)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.gram();
        let n = g.rows();
        (&g - &Self::identity(n)).max_abs()
    }

    pub fn is_unitary(&self) -> bool {
        self.is_square() && self.unitarity_residual() <= 1e-12 * self.rows() as f64
    }

    /// `max |(X - X*)_ij|`.
    pub fn hermiticity_residual(&self) -> f64 {
        (self - &self.adjoint()).max_abs()
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        self.inner.clone().try_inverse().map(Self::from_nalgebra).ok_or(Error::SingularInput)
    }

    pub fn determinant(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
        }
        Ok(self.inner.clone().lu().determinant())
    }

    pub fn sigma_max(&self) -> Result<f64> {
        Ok(singular_values(self)?.last().copied().unwrap_or(0.0))
    }

    /// Whether the matrix lies in the open ball `{A : A*A < 1}`.
    pub fn in_ball(&self) -> bool {
        matches!(self.sigma_max(), Ok(s) if s < 1.0 - BALL_MARGIN)
    }

    /// Returns the squared singular values, or an error if the matrix is on or
    /// outside the ball boundary.
    pub fn ensure_in_ball(&self) -> Result<Vec<f64>> {
        let sv = singular_values(self)?;
        let smax = sv.last().copied().unwrap_or(0.0);
        if !(smax < 1.0 - BALL_MARGIN) {
            return Err(Error::OutsideBall { sigma_max: smax });
        }
        Ok(sv.into_iter().map(|s| s * s).collect())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {:?}", self.rows(), self.cols(), self.entries_row_major())
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

/// Kronecker product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_nalgebra(a.as_nalgebra().kronecker(b.as_nalgebra()))
}

// ---------------------------------------------------------------------------
// Decompositions
// ---------------------------------------------------------------------------

/// Singular value decomposition `X = U diag(s) V*` with `s` ascending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: ComplexMatrix,
}

/// Eigen-decomposition `X = V diag(values) V*` of a Hermitian matrix, values
/// ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Polar decomposition `X = U S` with `U` unitary and `S` positive
/// semi-definite.
#[derive(Clone, Debug)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    pub positive: ComplexMatrix,
}

/// Stable ascending order of `values`; equal values keep their original order.
fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn check_finite(x: &ComplexMatrix) -> Result<()> {
    if x.as_nalgebra().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NoConvergence("non-finite matrix entries".into()))
    }
}

pub fn singular_values(x: &ComplexMatrix) -> Result<Vec<f64>> {
    check_finite(x)?;
    if x.rows() == 0 || x.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(x.inner.clone(), false, false, DECOMP_EPS, DECOMP_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence("singular value iteration".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

pub fn svd(x: &ComplexMatrix) -> Result<Svd> {
    check_finite(x)?;
    let dec = SVD::try_new(x.inner.clone(), true, true, DECOMP_EPS, DECOMP_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence("singular value iteration".into()))?;
    let s: Vec<f64> = dec.singular_values.iter().copied().collect();
    let u = dec.u.expect("requested U");
    let vt = dec.v_t.expect("requested V*");
    let order = ascending_order(&s);
    let k = s.len();
    let u_sorted = DMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let vt_sorted = DMatrix::from_fn(k, vt.ncols(), |i, j| vt[(order[i], j)]);
    Ok(Svd {
        u: ComplexMatrix::from_nalgebra(u_sorted),
        singular_values: order.iter().map(|&i| s[i]).collect(),
        v_adjoint: ComplexMatrix::from_nalgebra(vt_sorted),
    })
}

pub fn hermitian_eigen(x: &ComplexMatrix) -> Result<HermitianEigen> {
    check_finite(x)?;
    if !x.is_square() {
        return Err(Error::DimensionMismatch("eigen-decomposition of a non-square matrix".into()));
    }
    let scale = x.max_abs().max(1.0);
    let res = x.hermiticity_residual();
    if res > 1e-12 * scale {
        return Err(Error::NonHermitian(res));
    }
    // Symmetrize so round-off in the input does not leak into the result.
    let h = (&x.inner + x.inner.adjoint()).map(|z| z * 0.5);
    let dec = SymmetricEigen::try_new(h, DECOMP_EPS, DECOMP_MAX_ITER)
        .ok_or_else(|| Error::NoConvergence("Hermitian eigenvalue iteration".into()))?;
    let vals: Vec<f64> = dec.eigenvalues.iter().copied().collect();
    let order = ascending_order(&vals);
    let n = vals.len();
    let vecs = DMatrix::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen {
        values: order.iter().map(|&i| vals[i]).collect(),
        vectors: ComplexMatrix::from_nalgebra(vecs),
    })
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(x: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(x)?;
    let d: Vec<f64> = eig.values.iter().map(|&v| f(v)).collect();
    let v = &eig.vectors;
    Ok(&(v * &ComplexMatrix::from_real_diagonal(&d)) * &v.adjoint())
}

pub fn polar(x: &ComplexMatrix) -> Result<Polar> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch("polar decomposition of a non-square matrix".into()));
    }
    let Svd { u, singular_values, v_adjoint } = svd(x)?;
    let v = v_adjoint.adjoint();
    let unitary = &u * &v_adjoint;
    let positive = &(&v * &ComplexMatrix::from_real_diagonal(&singular_values)) * &v_adjoint;
    Ok(Polar { unitary, positive })
}

// ---------------------------------------------------------------------------
// Determinant identities
// ---------------------------------------------------------------------------

/// Real `2n x 2n` block form `[[Re X, -Im X], [Im X, Re X]]`.
pub fn realify(x: &ComplexMatrix) -> DMatrix<f64> {
    let (r, c) = (x.rows(), x.cols());
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = x.get(i % r, j % c);
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Determinant of the realified matrix of `x`, which equals `|det x|^2`.
pub fn det_realified(x: &ComplexMatrix) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch("det_realified needs a square matrix".into()));
    }
    if x.rows() == 0 {
        return Ok(1.0);
    }
    let sv = singular_values(x)?;
    let smax = sv.last().copied().unwrap_or(0.0);
    if sv[0] <= smax * 1e-14 * x.rows() as f64 {
        return Err(Error::SingularInput);
    }
    Ok(realify(x).lu().determinant())
}

/// `det(1 - A*A (x) D*D) = prod_{i,j} (1 - a_i^2 d_j^2)` over the squared
/// singular values of both blocks.
pub fn coupling_det(a: &ComplexMatrix, d: &ComplexMatrix) -> Result<f64> {
    Ok(log_coupling_det(a, d)?.exp())
}

pub fn log_coupling_det(a: &ComplexMatrix, d: &ComplexMatrix) -> Result<f64> {
    let a2 = a.ensure_in_ball()?;
    let d2 = d.ensure_in_ball()?;
    let mut acc = 0.0;
    for &x in &a2 {
        for &y in &d2 {
            acc += (-x * y).ln_1p();
        }
    }
    Ok(acc)
}

/// `power * log det(1 - A*A)` as a positive [`LogValue`].
pub fn log_det_one_minus_gram(a: &ComplexMatrix, power: f64) -> Result<LogValue> {
    let s2 = a.ensure_in_ball()?;
    let ld: f64 = s2.iter().map(|&x| (-x).ln_1p()).sum();
    Ok(LogValue::from_log(power * ld))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            // uniform in the disc of the given radius
            loop {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if z.norm() < 1.0 {
                    return z * radius;
                }
            }
        })
    }

    fn random_ball(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let m = random_matrix(rng, n, 1.0);
        let s = m.sigma_max().unwrap();
        m.scale(rng.random_range(0.05..0.95) / s)
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn row_major_layout() {
        let m = ComplexMatrix::from_row_major(2, 3, (0..6).map(|k| c(k as f64, 0.0)).collect()).unwrap();
        assert_eq!(m.get(0, 2), c(2.0, 0.0));
        assert_eq!(m.get(1, 0), c(3.0, 0.0));
        assert_eq!(m.entries_row_major()[4], c(4.0, 0.0));
    }

    #[test]
    fn det_realified_small_cases() {
        let i1 = ComplexMatrix::from_row_major(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert!((det_realified(&i1).unwrap() - 1.0).abs() < 1e-15);
        assert!((det_realified(&ComplexMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        let sing = ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 1.0), c(2.0, 2.0), c(1.0, 0.0), c(2.0, 1.0)]).unwrap();
        let sing2 = ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert_eq!(det_realified(&sing2), Err(Error::SingularInput));
        assert!(det_realified(&sing).is_ok());
    }

    #[test]
    fn det_realified_matches_complex_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = random_matrix(&mut rng, 3, 1.0);
            let expect = x.determinant().unwrap().norm_sqr();
            let got = det_realified(&x).unwrap();
            assert!((got - expect).abs() <= 1e-10 * expect, "{got} vs {expect}");
        }
    }

    #[test]
    fn coupling_det_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = random_ball(&mut rng, 3);
        assert_eq!(coupling_det(&ComplexMatrix::zeros(2, 2), &d).unwrap(), 1.0);
        let cc = 0.7;
        let a = ComplexMatrix::scaled_identity(1, cc);
        assert!((coupling_det(&a, &a).unwrap() - (1.0 - cc.powi(4))).abs() < 1e-15);
        let outside = ComplexMatrix::scaled_identity(2, 1.0);
        assert!(matches!(coupling_det(&outside, &d), Err(Error::OutsideBall { .. })));
    }

    #[test]
    fn coupling_det_matches_explicit_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let a = random_ball(&mut rng, 2);
            let d = random_ball(&mut rng, 3);
            let k = kron(&a.gram(), &d.gram());
            let explicit = (&ComplexMatrix::identity(6) - &k).determinant().unwrap();
            let got = coupling_det(&a, &d).unwrap();
            assert!(explicit.im.abs() < 1e-12);
            assert!((got - explicit.re).abs() <= 1e-10 * explicit.re);
        }
    }

    #[test]
    fn log_det_one_minus_gram_cases() {
        let z = log_det_one_minus_gram(&ComplexMatrix::zeros(3, 3), 7.0).unwrap();
        assert_eq!(z.log_magnitude(), 0.0);
        let h = ComplexMatrix::scaled_identity(1, 0.5f64.sqrt());
        let v = log_det_one_minus_gram(&h, 2.0).unwrap();
        assert!((v.log_magnitude() - 2.0 * 0.5f64.ln()).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_ball(&mut rng, 2);
        let direct = (&ComplexMatrix::identity(2) - &a.gram()).determinant().unwrap().re.powi(50);
        let got = log_det_one_minus_gram(&a, 50.0).unwrap().to_f64();
        assert!((got - direct).abs() <= 1e-9 * direct);
        assert!(log_det_one_minus_gram(&ComplexMatrix::identity(2), 1.0).is_err());
    }

    #[test]
    fn eigenvalues_ascending() {
        let d = ComplexMatrix::from_real_diagonal(&[3.0, 1.0]);
        let e = hermitian_eigen(&d).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        // ties keep index order: the eigenvector for the first 2.0 is e_0
        let t = ComplexMatrix::from_real_diagonal(&[2.0, 2.0, 1.0]);
        let e = hermitian_eigen(&t).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 2.0]);
        assert!(hermitian_eigen(&ComplexMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap()).is_err());
    }

    #[test]
    fn decompositions_reassemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(&mut rng, 4, 2.0);
        let s = svd(&x).unwrap();
        assert!(s.singular_values.windows(2).all(|w| w[0] <= w[1]));
        let back = &(&s.u * &ComplexMatrix::from_real_diagonal(&s.singular_values)) * &s.v_adjoint;
        assert!((&back - &x).max_abs() < 1e-10);

        let p = polar(&x).unwrap();
        assert!((&(&p.unitary * &p.positive) - &x).max_abs() < 1e-10);
        assert!(p.unitary.unitarity_residual() < 1e-12);
        assert!(p.positive.hermiticity_residual() < 1e-12);

        let h = &x + &x.adjoint();
        let e = hermitian_eigen(&h).unwrap();
        let back = &(&e.vectors * &ComplexMatrix::from_real_diagonal(&e.values)) * &e.vectors.adjoint();
        assert!((&back - &h).max_abs() < 1e-10);
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_matrix(&mut rng, 4, 1.0);
        let u = polar(&x).unwrap().unitary;
        for s in singular_values(&u).unwrap() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(u.is_unitary());
    }

    #[test]
    fn realify_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 3, 1.0);
        let y = random_matrix(&mut rng, 3, 1.0);
        let lhs = realify(&x) * realify(&y);
        let rhs = realify(&(&x * &y));
        assert!((lhs - rhs).amax() < 1e-12);
    }
}
