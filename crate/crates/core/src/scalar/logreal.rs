use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::Rational;

/// An extended real number used for `log |x|` style quantities.
///
/// Non-archimedean quantities are kept exact as `-v * ln p` with a rational
/// `v`; everything else is a plain `f64`. Mixing the two (or two different
/// primes) degrades to `Real`.
#[derive(Clone, Debug)]
pub enum LogReal {
    NegInf,
    /// `-v * ln(p)`, i.e. the log of `p^(-v)`.
    Val { v: Rational, p: u32 },
    Real(f64),
}

impl LogReal {
    pub fn zero_val(p: u32) -> LogReal {
        LogReal::Val { v: Rational::zero(), p }
    }

    pub fn from_valuation(v: Rational, p: u32) -> LogReal {
        LogReal::Val { v, p }
    }

    pub fn from_int_valuation(v: i64, p: u32) -> LogReal {
        LogReal::Val { v: Rational::from_integer(BigInt::from(v)), p }
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, LogReal::NegInf)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, LogReal::Val { .. } | LogReal::NegInf)
    }

    /// The exact valuation `v` when this is `-v ln p`.
    pub fn valuation(&self) -> Option<&Rational> {
        match self {
            LogReal::Val { v, .. } => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            LogReal::NegInf => f64::NEG_INFINITY,
            LogReal::Val { v, p } => -v.to_f64().unwrap_or(f64::NAN) * f64::from(*p).ln(),
            LogReal::Real(x) => *x,
        }
    }

    /// Exponentiated value `e^self` (0 for `-inf`).
    pub fn exp(&self) -> f64 {
        self.to_f64().exp()
    }

    pub fn add(&self, other: &LogReal) -> LogReal {
        match (self, other) {
            (LogReal::NegInf, _) | (_, LogReal::NegInf) => LogReal::NegInf,
            (LogReal::Val { v: a, p }, LogReal::Val { v: b, p: q }) if p == q => {
                LogReal::Val { v: a + b, p: *p }
            }
            _ => LogReal::Real(self.to_f64() + other.to_f64()),
        }
    }

    /// `self - other`. Panics when `other` is `-inf`: none of the kernels
    /// subtract a quantity that can be `-inf`.
    pub fn sub(&self, other: &LogReal) -> LogReal {
        assert!(!other.is_neg_inf(), "LogReal: subtracting -inf");
        self.add(&other.neg_finite())
    }

    fn neg_finite(&self) -> LogReal {
        match self {
            LogReal::NegInf => unreachable!(),
            LogReal::Val { v, p } => LogReal::Val { v: -v, p: *p },
            LogReal::Real(x) => LogReal::Real(-x),
        }
    }

    /// Multiplies by a nonnegative rational factor.
    pub fn scale(&self, q: &Rational) -> LogReal {
        debug_assert!(!q.is_negative());
        match self {
            LogReal::NegInf if q.is_zero() => LogReal::Real(0.0),
            LogReal::NegInf => LogReal::NegInf,
            LogReal::Val { v, p } => LogReal::Val { v: v * q, p: *p },
            LogReal::Real(x) => LogReal::Real(x * q.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn scale_int(&self, k: u64) -> LogReal {
        self.scale(&Rational::from_integer(BigInt::from(k)))
    }

    pub fn max(self, other: LogReal) -> LogReal {
        if other.partial_cmp(&self) == Some(Ordering::Greater) {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: LogReal) -> LogReal {
        if other.partial_cmp(&self) == Some(Ordering::Less) {
            other
        } else {
            self
        }
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }

    /// `vp=<q>` for exact values, `None` otherwise.
    pub fn exact_repr(&self) -> Option<String> {
        match self {
            LogReal::Val { v, .. } => Some(format!("vp={v}")),
            LogReal::NegInf => Some("-inf".to_string()),
            LogReal::Real(_) => None,
        }
    }
}

impl PartialEq for LogReal {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (LogReal::NegInf, LogReal::NegInf) => Some(Ordering::Equal),
            (LogReal::NegInf, _) => Some(Ordering::Less),
            (_, LogReal::NegInf) => Some(Ordering::Greater),
            // larger valuation means smaller absolute value
            (LogReal::Val { v: a, p }, LogReal::Val { v: b, p: q }) if p == q => Some(b.cmp(a)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogReal::NegInf => write!(f, "-inf"),
            other => write!(f, "{}", other.to_f64()),
        }
    }
}
