use thiserror::Error;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular input")]
    SingularInput,

    #[error("outside ball domain: largest singular value {sigma_max} is not below 1")]
    OutsideBall { sigma_max: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty dimension")]
    EmptyDimension,

    #[error("decomposition did not converge: {0}")]
    NoConvergence(String),

    #[error("reduction requires N >= 2q (got N = {n}, q = {q})")]
    ReductionDomain { n: usize, q: usize },

    #[error("integrand returned a non-finite value at sample {index}")]
    NonFinite { index: u64 },

    #[error("exponent overflow: largest exponent minus shift is {excess:.3}; rerun with an exponent shift of at least {suggested_shift:.6}")]
    ExponentOverflow { excess: f64, suggested_shift: f64 },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("enumeration cap exceeded: p = {p} > {cap}")]
    EnumerationCap { p: usize, cap: usize },

    #[error("homogeneity violation: f(2A) / (2^{degree} f(A)) = {ratio}")]
    HomogeneityViolation { degree: u32, ratio: f64 },

    #[error("non-Hermitian input (max residual {0:e})")]
    NonHermitian(f64),

    #[error("no interior saddle for beta = {0} (requires beta >= 4)")]
    NoInteriorSaddle(f64),

    #[error("geometric regime violated: beta = {0} must be below 1 in scaled mode")]
    GeometricRegime(f64),

    #[error("quadrature did not reach tolerance: estimate {value}, error {error:e}")]
    QuadratureTolerance { value: f64, error: f64 },

    #[error("non-integrable singularity detected near abscissa {abscissa}")]
    Singularity { abscissa: f64 },

    #[error("at least 2 samples are required, got {0}")]
    TooFewSamples(u64),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
