//! Scalars in three valued-field backends: complex doubles, fixed-precision
//! p-adic numbers, and truncated Laurent series over `F_p` with `|t| = 1/p`.

mod laurent;
mod logreal;
mod padic;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Error, Result};

pub use laurent::Laurent;
pub use logreal::LogReal;
pub use padic::PAdic;

pub type Rational = num_rational::BigRational;

/// Largest prime accepted for the non-archimedean backends.
pub const MAX_PRIME: u32 = 97;

/// Valuation of a non-archimedean scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    /// Exact zero.
    Infinite,
    /// Indeterminate value known to have valuation at least this.
    AtLeast(i64),
}

/// Reduction of an integral element to the residue field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residue {
    Value(u32),
    NotIntegral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Complex,
    PAdic { p: u32, prec: u32 },
    Laurent { p: u32, prec: u32 },
}

pub(crate) fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl Backend {
    pub fn padic(p: u32, prec: u32) -> Result<Backend> {
        if !is_prime(p) || p > MAX_PRIME {
            return invalid(format!("p-adic prime must be a prime <= {MAX_PRIME}, got {p}"));
        }
        if prec == 0 || (prec as f64) * (p as f64).log2() > 62.0 {
            return invalid(format!("p-adic precision {prec} out of range for p = {p} (need p^N <= 2^62)"));
        }
        Ok(Backend::PAdic { p, prec })
    }

    pub fn laurent(p: u32, prec: u32) -> Result<Backend> {
        if !is_prime(p) || p > MAX_PRIME {
            return invalid(format!("Laurent characteristic must be a prime <= {MAX_PRIME}, got {p}"));
        }
        if prec == 0 || prec > 1 << 16 {
            return invalid(format!("Laurent precision {prec} out of range"));
        }
        Ok(Backend::Laurent { p, prec })
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Backend::Complex)
    }

    pub fn prime(&self) -> Option<u32> {
        match self {
            Backend::Complex => None,
            Backend::PAdic { p, .. } | Backend::Laurent { p, .. } => Some(*p),
        }
    }

    pub fn precision(&self) -> Option<u32> {
        match self {
            Backend::Complex => None,
            Backend::PAdic { prec, .. } | Backend::Laurent { prec, .. } => Some(*prec),
        }
    }

    pub fn zero(&self) -> Scalar {
        match *self {
            Backend::Complex => Scalar::Complex(Complex64::new(0.0, 0.0)),
            Backend::PAdic { p, prec } => Scalar::PAdic(PAdic::zero(p, prec)),
            Backend::Laurent { p, prec } => Scalar::Laurent(Laurent::zero(p, prec)),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match *self {
            Backend::Complex => Scalar::Complex(Complex64::new(n as f64, 0.0)),
            Backend::PAdic { p, prec } => Scalar::PAdic(PAdic::from_i64(p, prec, n)),
            Backend::Laurent { p, prec } => Scalar::Laurent(Laurent::from_i64(p, prec, n)),
        }
    }

    pub fn from_rational(&self, q: &Rational) -> Result<Scalar> {
        match *self {
            Backend::Complex => {
                let x = q.to_f64().ok_or_else(|| Error::InvalidArgument("rational out of f64 range".into()))?;
                Ok(Scalar::Complex(Complex64::new(x, 0.0)))
            }
            Backend::PAdic { p, prec } => Ok(Scalar::PAdic(PAdic::from_rational(p, prec, q))),
            Backend::Laurent { p, prec } => {
                let pb = BigInt::from(p);
                let den = q.denom().mod_floor(&pb);
                if den.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                let num = q.numer().mod_floor(&pb).to_i64().unwrap();
                let den = den.to_i64().unwrap();
                let inv = (1..p as i64).find(|x| (x * den) % p as i64 == 1).unwrap();
                Ok(Scalar::Laurent(Laurent::from_i64(p, prec, num * inv)))
            }
        }
    }

    pub fn from_complex(&self, z: Complex64) -> Result<Scalar> {
        match self {
            Backend::Complex if z.re.is_finite() && z.im.is_finite() => Ok(Scalar::Complex(z)),
            Backend::Complex => invalid("complex scalar components must be finite"),
            _ => unsupported("complex literal in a non-archimedean backend"),
        }
    }

    /// The uniformizer `p` (p-adic) or `t` (Laurent).
    pub fn uniformizer(&self) -> Result<Scalar> {
        match *self {
            Backend::Complex => unsupported("uniformizer of the complex backend"),
            Backend::PAdic { p, prec } => Ok(Scalar::PAdic(PAdic::from_i64(p, prec, p as i64))),
            Backend::Laurent { p, prec } => Ok(Scalar::Laurent(Laurent::t_pow(p, prec, 1))),
        }
    }

    /// `p^v` or `t^v`: the canonical element of valuation `v`.
    pub fn uniformizer_pow(&self, v: i64) -> Result<Scalar> {
        self.uniformizer()?.powi(v)
    }

    /// Value `O(p^abs)` / `O(t^abs)`.
    pub fn indeterminate(&self, abs: i64) -> Result<Scalar> {
        match *self {
            Backend::Complex => unsupported("big-O terms in the complex backend"),
            Backend::PAdic { p, prec } => Ok(Scalar::PAdic(PAdic::indeterminate(p, prec, abs))),
            Backend::Laurent { p, prec } => Ok(Scalar::Laurent(Laurent::indeterminate(p, prec, abs))),
        }
    }

    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        crate::expr::parse_scalar(*self, s)
    }

    pub fn check(&self, x: &Scalar) -> Result<()> {
        if x.backend() == *self {
            Ok(())
        } else {
            Err(Error::BackendMismatch(self.to_string(), x.backend().to_string()))
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Complex => write!(f, "complex"),
            Backend::PAdic { p, prec } => write!(f, "padic(p={p}, N={prec})"),
            Backend::Laurent { p, prec } => write!(f, "laurent(p={p}, N={prec})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Complex(Complex64),
    PAdic(PAdic),
    Laurent(Laurent),
}

impl Scalar {
    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Complex(_) => Backend::Complex,
            Scalar::PAdic(x) => Backend::PAdic { p: x.p, prec: x.cap },
            Scalar::Laurent(x) => Backend::Laurent { p: x.p, prec: x.cap },
        }
    }

    /// Exact zero (a complex value compares equal to `0`).
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Complex(z) => z.re == 0.0 && z.im == 0.0,
            Scalar::PAdic(x) => x.is_zero(),
            Scalar::Laurent(x) => x.is_zero(),
        }
    }

    /// Exact non-archimedean values; complex values are never exact.
    pub fn is_exact(&self) -> bool {
        match self {
            Scalar::Complex(_) => false,
            Scalar::PAdic(x) => x.is_exact(),
            Scalar::Laurent(x) => x.is_exact(),
        }
    }

    /// All significant digits lost: only a lower bound on the valuation is known.
    pub fn is_indeterminate(&self) -> bool {
        matches!(self.valuation(), Ok(Valuation::AtLeast(_)))
    }

    pub fn as_complex(&self) -> Option<Complex64> {
        match self {
            Scalar::Complex(z) => Some(*z),
            _ => None,
        }
    }

    pub fn arith(&self, other: &Scalar, op: ArithOp) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Complex(a), Scalar::Complex(b)) => {
                let r = match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                    ArithOp::Div => {
                        if b.re == 0.0 && b.im == 0.0 {
                            return Err(Error::DivisionByZero);
                        }
                        a / b
                    }
                };
                Ok(Scalar::Complex(r))
            }
            (Scalar::PAdic(a), Scalar::PAdic(b)) if a.p == b.p && a.cap == b.cap => {
                Ok(Scalar::PAdic(match op {
                    ArithOp::Add => a.add(b),
                    ArithOp::Sub => a.add(&b.neg()),
                    ArithOp::Mul => a.mul(b),
                    ArithOp::Div => a.mul(&b.inv()?),
                }))
            }
            (Scalar::Laurent(a), Scalar::Laurent(b)) if a.p == b.p && a.cap == b.cap => {
                Ok(Scalar::Laurent(match op {
                    ArithOp::Add => a.add(b),
                    ArithOp::Sub => a.add(&b.neg()),
                    ArithOp::Mul => a.mul(b),
                    ArithOp::Div => a.mul(&b.inv()?),
                }))
            }
            _ => Err(Error::BackendMismatch(self.backend().to_string(), other.backend().to_string())),
        }
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar> {
        self.arith(o, ArithOp::Add)
    }

    pub fn try_sub(&self, o: &Scalar) -> Result<Scalar> {
        self.arith(o, ArithOp::Sub)
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar> {
        self.arith(o, ArithOp::Mul)
    }

    pub fn try_div(&self, o: &Scalar) -> Result<Scalar> {
        self.arith(o, ArithOp::Div)
    }

    pub fn inv(&self) -> Result<Scalar> {
        self.backend().one().try_div(self)
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.backend().one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn powi(&self, k: i64) -> Result<Scalar> {
        let r = self.pow(k.unsigned_abs());
        if k < 0 {
            r.inv()
        } else {
            Ok(r)
        }
    }

    /// `log |x|`, `-inf` for zero. Errors on indeterminate values.
    pub fn log_abs(&self) -> Result<LogReal> {
        match self {
            Scalar::Complex(z) => {
                let n = z.norm();
                Ok(if n == 0.0 { LogReal::NegInf } else { LogReal::Real(n.ln()) })
            }
            _ => {
                let p = self.backend().prime().unwrap();
                match self.valuation()? {
                    Valuation::Infinite => Ok(LogReal::NegInf),
                    Valuation::Finite(v) => Ok(LogReal::from_int_valuation(v, p)),
                    Valuation::AtLeast(a) => Err(Error::PrecisionExhausted(format!(
                        "absolute value of O({}^{a}) is unknown",
                        if matches!(self, Scalar::Laurent(_)) { "t".to_string() } else { p.to_string() }
                    ))),
                }
            }
        }
    }

    /// An upper bound for `log |x|`, exact unless the value is indeterminate.
    pub fn log_abs_upper(&self) -> LogReal {
        match self.valuation() {
            Ok(Valuation::AtLeast(a)) => LogReal::from_int_valuation(a, self.backend().prime().unwrap()),
            _ => self.log_abs().unwrap(),
        }
    }

    pub fn abs(&self) -> Result<f64> {
        Ok(self.log_abs()?.exp())
    }

    pub fn valuation(&self) -> Result<Valuation> {
        match self {
            Scalar::Complex(_) => unsupported("valuation of a complex scalar"),
            Scalar::PAdic(x) => Ok(x.valuation()),
            Scalar::Laurent(x) => Ok(x.valuation()),
        }
    }

    pub fn residue(&self) -> Result<Residue> {
        let r = match self {
            Scalar::Complex(_) => return unsupported("residue of a complex scalar"),
            Scalar::PAdic(x) => x.residue()?,
            Scalar::Laurent(x) => x.residue()?,
        };
        Ok(r.map_or(Residue::NotIntegral, Residue::Value))
    }

    /// Drops exactness (non-archimedean); identity on complex values.
    pub fn to_approx(&self) -> Scalar {
        match self {
            Scalar::Complex(_) => self.clone(),
            Scalar::PAdic(x) => Scalar::PAdic(x.to_approx()),
            Scalar::Laurent(x) => Scalar::Laurent(x.to_approx()),
        }
    }

    /// Truncates to absolute precision `O(p^abs)`; identity on complex values.
    pub fn with_absolute_precision(&self, abs: i64) -> Scalar {
        match self {
            Scalar::Complex(_) => self.clone(),
            Scalar::PAdic(x) => Scalar::PAdic(x.with_absolute_precision(abs)),
            Scalar::Laurent(x) => Scalar::Laurent(x.with_absolute_precision(abs)),
        }
    }

    /// Exact rational value of a p-adic scalar.
    pub fn to_rational(&self) -> Option<Rational> {
        match self {
            Scalar::PAdic(x) => x.to_rational(),
            _ => None,
        }
    }

    /// Exact comparison; complex values compare bitwise.
    pub fn exactly_equals(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Complex(a), Scalar::Complex(b)) => a == b,
            _ => {
                self.backend() == other.backend()
                    && self.is_exact()
                    && other.is_exact()
                    && self.try_sub(other).map(|d| d.is_zero()).unwrap_or(false)
            }
        }
    }
}

/// Shortest round-trip float text, in exponent form when positional would be long.
struct Short(f64);

impl fmt::Display for Short {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && !(1e-4..1e15).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Complex(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", Short(z.re))
                } else if z.im < 0.0 {
                    write!(f, "{}-{}i", Short(z.re), Short(-z.im))
                } else {
                    write!(f, "{}+{}i", Short(z.re), Short(z.im))
                }
            }
            Scalar::PAdic(x) => write!(f, "{}", x.display()),
            Scalar::Laurent(x) => write!(f, "{}", x.display()),
        }
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident, $op:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            /// Panics on backend mismatch; callers validate backends up front.
            fn $m(self, rhs: &Scalar) -> Scalar {
                self.arith(rhs, $op).expect("scalar backend mismatch")
            }
        }
    };
}

scalar_binop!(Add, add, ArithOp::Add);
scalar_binop!(Sub, sub, ArithOp::Sub);
scalar_binop!(Mul, mul, ArithOp::Mul);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Complex(z) => Scalar::Complex(-z),
            Scalar::PAdic(x) => Scalar::PAdic(x.neg()),
            Scalar::Laurent(x) => Scalar::Laurent(x.neg()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn padic_product_canonical() {
        let b = Backend::padic(5, 4).unwrap();
        let x = b.from_i64(75).try_mul(&b.from_i64(5)).unwrap();
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(3));
        let Scalar::PAdic(px) = &x else { panic!() };
        assert_eq!(px.unit_mod(4), Some(3));
    }

    #[test]
    fn complex_division() {
        let b = Backend::Complex;
        let x = b.from_i64(1).try_div(&b.from_complex(Complex64::new(0.0, 1.0)).unwrap()).unwrap();
        assert_eq!(x.as_complex().unwrap(), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn log_abs_examples() {
        let b = Backend::padic(5, 6).unwrap();
        assert_eq!(b.from_i64(75).log_abs().unwrap(), LogReal::from_int_valuation(2, 5));
        assert!((b.from_i64(75).log_abs().unwrap().to_f64() + 2.0 * 5f64.ln()).abs() < 1e-15);
        let l = Backend::laurent(2, 8).unwrap();
        let t3 = l.uniformizer_pow(3).unwrap();
        assert!((t3.log_abs().unwrap().to_f64() + 3.0 * 2f64.ln()).abs() < 1e-15);
        let c = Backend::Complex.from_complex(Complex64::new(3.0, 4.0)).unwrap();
        assert!((c.log_abs().unwrap().to_f64() - 5f64.ln()).abs() < 1e-15);
        assert!(b.zero().log_abs().unwrap().is_neg_inf());
    }

    #[test]
    fn residue_examples() {
        let b = Backend::padic(5, 6).unwrap();
        assert_eq!(b.from_i64(75).residue().unwrap(), Residue::Value(0));
        assert_eq!(b.from_i64(7).residue().unwrap(), Residue::Value(2));
        assert_eq!(b.from_rational(&q(1, 5)).unwrap().residue().unwrap(), Residue::NotIntegral);
        assert!(Backend::Complex.one().residue().is_err());
    }

    #[test]
    fn mismatch_and_division_errors() {
        let a = Backend::padic(5, 6).unwrap().one();
        let b = Backend::padic(7, 6).unwrap().one();
        assert!(matches!(a.try_add(&b), Err(Error::BackendMismatch(..))));
        assert_eq!(a.try_div(&a.backend().zero()), Err(Error::DivisionByZero));
    }

    #[test]
    fn backend_validation() {
        assert!(Backend::padic(4, 3).is_err());
        assert!(Backend::padic(101, 3).is_err());
        assert!(Backend::padic(97, 10).is_err());
        assert!(Backend::padic(97, 9).is_ok());
        assert!(Backend::laurent(2, 0).is_err());
    }

    #[test]
    fn complex_text_round_trips() {
        for (re, im) in [(1.0001692397053024, -1.504632769052528e-36), (0.25, 3e20), (-2.0, 0.0), (5e-7, 1.0)] {
            let z = Backend::Complex.from_complex(Complex64::new(re, im)).unwrap();
            let text = z.to_string();
            assert!(text.len() < 50, "{text}");
            assert_eq!(Backend::Complex.parse_scalar(&text).unwrap().as_complex().unwrap(), Complex64::new(re, im));
        }
    }

    #[test]
    fn laurent_from_rational() {
        let b = Backend::laurent(5, 4).unwrap();
        let x = b.from_rational(&q(1, 2)).unwrap();
        assert!(x.try_mul(&b.from_i64(2)).unwrap().exactly_equals(&b.one()));
        assert!(b.from_rational(&q(1, 5)).is_err());
    }

    fn padic_val() -> impl Strategy<Value = Scalar> {
        (prop_oneof![Just(2u32), Just(3), Just(5), Just(7)], -3i64..4, 1i64..500, any::<bool>()).prop_map(
            |(p, v, u, approx)| {
                let b = Backend::padic(p, 8).unwrap();
                let x = b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap();
                if approx {
                    x.to_approx()
                } else {
                    x
                }
            },
        )
    }

    proptest! {
        #[test]
        fn ultrametric_inequality(x in padic_val(), v in -3i64..4, u in 1i64..500) {
            let b = x.backend();
            let y = b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap();
            let s = x.try_add(&y).unwrap();
            let (lx, ly) = (x.log_abs().unwrap(), y.log_abs().unwrap());
            let m = lx.clone().max(ly.clone());
            let ls = s.log_abs_upper();
            prop_assert!(ls <= m);
            if lx != ly {
                prop_assert_eq!(s.log_abs().unwrap(), m);
            }
        }

        #[test]
        fn multiplicativity_exact(x in padic_val(), v in -3i64..4, u in 1i64..500) {
            let b = x.backend();
            let y = b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap();
            let xy = x.try_mul(&y).unwrap();
            prop_assert_eq!(xy.log_abs().unwrap(), x.log_abs().unwrap().add(&y.log_abs().unwrap()));
        }

        #[test]
        fn multiplicativity_complex(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0, d in -10.0f64..10.0) {
            prop_assume!(a.hypot(b) > 1e-3 && c.hypot(d) > 1e-3);
            let x = Scalar::Complex(Complex64::new(a, b));
            let y = Scalar::Complex(Complex64::new(c, d));
            let lhs = x.try_mul(&y).unwrap().log_abs().unwrap().to_f64();
            let rhs = x.log_abs().unwrap().to_f64() + y.log_abs().unwrap().to_f64();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn laurent_ultrametric(c1 in proptest::collection::vec(0i64..3, 1..6), c2 in proptest::collection::vec(0i64..3, 1..6), v1 in -2i64..3, v2 in -2i64..3) {
            let b = Backend::laurent(3, 8).unwrap();
            let mk = |c: &Vec<i64>, v: i64| Scalar::Laurent(Laurent::from_coeffs(3, 8, v, c, true));
            let (x, y) = (mk(&c1, v1), mk(&c2, v2));
            prop_assume!(!x.is_zero() && !y.is_zero());
            let s = x.try_add(&y).unwrap();
            let m = x.log_abs().unwrap().max(y.log_abs().unwrap());
            prop_assert!(s.log_abs().unwrap() <= m);
            prop_assert_eq!(b, s.backend());
        }

        #[test]
        fn canonical_form_idempotent(x in padic_val()) {
            let y = x.try_add(&x.backend().zero()).unwrap();
            prop_assert_eq!(&y, &x);
            prop_assert_eq!(y.try_mul(&x.backend().one()).unwrap(), x);
        }
    }
}
