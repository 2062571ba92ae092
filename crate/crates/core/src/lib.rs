//! Integrals of functions of submatrix blocks of Haar-random unitaries.
//!
//! Four routes to the same numbers:
//!
//! * [`mc`]: Monte Carlo over Haar unitaries ([`haar`]), with error bars.
//! * [`reduction`]: the exact reduction to weighted integrals over the ball
//!   of `q x q` contractions, with quadrature for `q = 1, 2`.
//! * [`asymptotics`]: the leading pairing rule, Gaussian limits and
//!   factorization over orthogonal blocks.
//! * [`saddle`]: closed-form saddle-point asymptotics.
//!
//! Quantities whose size scales like `exp(c N)` are returned as [`LogValue`].

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod haar;
pub mod logvalue;
pub mod matrix;
pub mod mc;
pub mod quadrature;
pub mod reduction;
pub mod saddle;

pub use error::{Error, Result};
pub use haar::{BlockSpec, RngStream};
pub use logvalue::LogValue;
pub use matrix::ComplexMatrix;
pub use mc::{IntegrandSpec, McEstimate, McOptions};
pub use saddle::{SaddleReport, SaddleStatus};

// The guide's code listings, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/haar.md")]
    pub mod haar {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    pub mod monte_carlo {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    pub mod reduction {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    pub mod asymptotics {}
    #[doc = include_str!("../../../book/src/saddles.md")]
    pub mod saddles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
