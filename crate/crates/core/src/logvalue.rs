//! Phase plus log-magnitude representation of numbers whose size scales like
//! `e^{c N}`.
//!
//! `(1 - c^2)^N` underflows double precision once `N` reaches a few hundred, and
//! the saddle-point values overflow just as quickly, so every quantity carrying
//! an exponent proportional to `N` travels as a [`LogValue`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `phase * exp(log_magnitude)`, or an exact zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "LogValueRecord", try_from = "LogValueRecord")]
pub struct LogValue {
    log_magnitude: f64,
    phase: Complex64,
    zero: bool,
}

/// Wire form: `{"log_magnitude": .., "phase_re": .., "phase_im": ..}` with a
/// `null` log-magnitude for zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValueRecord {
    pub log_magnitude: Option<f64>,
    pub phase_re: f64,
    pub phase_im: f64,
}

impl From<LogValue> for LogValueRecord {
    fn from(v: LogValue) -> Self {
        LogValueRecord {
            log_magnitude: if v.zero { None } else { Some(v.log_magnitude) },
            phase_re: v.phase.re,
            phase_im: v.phase.im,
        }
    }
}

impl TryFrom<LogValueRecord> for LogValue {
    type Error = String;

    fn try_from(r: LogValueRecord) -> Result<Self, Self::Error> {
        match r.log_magnitude {
            None => Ok(LogValue::zero()),
            Some(l) if l.is_finite() => {
                let phase = Complex64::new(r.phase_re, r.phase_im);
                if (phase.norm() - 1.0).abs() > 1e-12 {
                    return Err(format!("phase {phase} does not have unit modulus"));
                }
                Ok(LogValue { log_magnitude: l, phase, zero: false })
            }
            Some(l) => Err(format!("log_magnitude {l} is not finite")),
        }
    }
}

impl LogValue {
    pub fn zero() -> Self {
        LogValue { log_magnitude: 0.0, phase: Complex64::new(1.0, 0.0), zero: true }
    }

    pub fn one() -> Self {
        Self::from_log(0.0)
    }

    /// A positive number `exp(log_magnitude)`. `-inf` maps to zero.
    pub fn from_log(log_magnitude: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            return Self::zero();
        }
        debug_assert!(log_magnitude.is_finite(), "log magnitude must be finite");
        LogValue { log_magnitude, phase: Complex64::new(1.0, 0.0), zero: false }
    }

    pub fn from_parts(log_magnitude: f64, phase: Complex64) -> Self {
        if log_magnitude == f64::NEG_INFINITY || phase == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        LogValue { log_magnitude, phase: phase / phase.norm(), zero: false }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_complex(Complex64::new(x, 0.0))
    }

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::zero()
        } else {
            LogValue { log_magnitude: r.ln(), phase: z / r, zero: false }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_magnitude(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    /// Sign of the real part of the phase, for quantities known to be real.
    pub fn sign(&self) -> f64 {
        if self.zero {
            0.0
        } else if self.phase.re < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.zero {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    /// Real part as an ordinary float; may overflow to `inf` or underflow to 0.
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn powf(&self, power: f64) -> Self {
        if self.zero {
            return if power == 0.0 { Self::one() } else { Self::zero() };
        }
        let arg = self.phase.arg() * power;
        LogValue {
            log_magnitude: self.log_magnitude * power,
            phase: Complex64::from_polar(1.0, arg),
            zero: false,
        }
    }

    /// Sum of two values without leaving the log domain.
    pub fn add(&self, other: &LogValue) -> LogValue {
        if self.zero {
            return *other;
        }
        if other.zero {
            return *self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let rel = small.phase * (small.log_magnitude - big.log_magnitude).exp();
        let s = big.phase + rel;
        let r = s.norm();
        if r == 0.0 {
            return Self::zero();
        }
        LogValue { log_magnitude: big.log_magnitude + r.ln(), phase: s / r, zero: false }
    }

    /// `ln(self / other)` for two positive values, the natural way to compare
    /// exponentially large numbers.
    pub fn log_ratio(&self, other: &LogValue) -> f64 {
        self.log_magnitude() - other.log_magnitude()
    }

    /// `self / other - 1`, computed without forming either quantity.
    pub fn relative_gap(&self, other: &LogValue) -> f64 {
        let d = self.log_ratio(other);
        let ratio = (self.phase / other.phase).re;
        ratio * d.exp_m1() + (ratio - 1.0)
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.zero || rhs.zero {
            return LogValue::zero();
        }
        let phase = self.phase * rhs.phase;
        LogValue {
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
            phase: phase / phase.norm(),
            zero: false,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;

    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.zero, "division by a zero LogValue");
        if self.zero {
            return LogValue::zero();
        }
        let phase = self.phase / rhs.phase;
        LogValue {
            log_magnitude: self.log_magnitude - rhs.log_magnitude,
            phase: phase / phase.norm(),
            zero: false,
        }
    }
}

impl PartialOrd for LogValue {
    /// Orders by signed magnitude for real values.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (sa, sb) = (self.sign(), other.sign());
        if sa != sb {
            return sa.partial_cmp(&sb);
        }
        let c = self.log_magnitude.partial_cmp(&other.log_magnitude)?;
        Some(if sa < 0.0 { c.reverse() } else { c })
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        if self.phase.im.abs() < 1e-15 {
            let s = if self.phase.re < 0.0 { "-" } else { "" };
            write!(f, "{s}exp({})", self.log_magnitude)
        } else {
            write!(f, "({})*exp({})", self.phase, self.log_magnitude)
        }
    }
}
