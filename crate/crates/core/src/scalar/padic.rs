//! Fixed-precision p-adic numbers.
//!
//! Elements are either exact rationals (kept exact while their height stays
//! small), approximations `p^val * unit + O(p^(val + prec))` with `prec`
//! relative digits, or an indeterminate `O(p^abs)` produced when
//! cancellation exhausts every known digit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::{Rational, Valuation};
use crate::error::{Error, Result};

/// Exact rationals whose numerator or denominator grows beyond this many
/// bits are demoted to approximations at the working precision.
const EXACT_BITS: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum PRepr {
    Zero,
    /// `p^val * unit`, `unit` a rational with no factor of `p`.
    Exact { val: i64, unit: Rational },
    /// `p^val * unit + O(p^(val+prec))`, `unit` reduced mod `p^prec`, prime to `p`.
    Approx { val: i64, unit: u64, prec: u32 },
    /// Known only to be divisible by `p^abs`.
    Indeterminate { abs: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PAdic {
    pub(crate) p: u32,
    pub(crate) cap: u32,
    pub(crate) repr: PRepr,
}

pub(crate) fn pow_u128(p: u32, k: u32) -> u128 {
    (p as u128).pow(k)
}

fn inv_mod(a: u128, m: u128) -> u128 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1, "inverse of a non-unit");
    old_s.rem_euclid(m as i128) as u128
}

fn strip_p(n: &BigInt, p: &BigInt) -> (BigInt, i64) {
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return (n, k);
        }
        n = q;
        k += 1;
    }
}

impl PAdic {
    pub(crate) fn new(p: u32, cap: u32, repr: PRepr) -> PAdic {
        PAdic { p, cap, repr }
    }

    pub fn zero(p: u32, cap: u32) -> PAdic {
        PAdic::new(p, cap, PRepr::Zero)
    }

    pub fn from_rational(p: u32, cap: u32, q: &Rational) -> PAdic {
        if q.is_zero() {
            return PAdic::zero(p, cap);
        }
        let pb = BigInt::from(p);
        let (num, vn) = strip_p(q.numer(), &pb);
        let (den, vd) = strip_p(q.denom(), &pb);
        PAdic::new(p, cap, PRepr::Exact { val: vn - vd, unit: Rational::new(num, den) }).demote_if_tall()
    }

    pub fn from_i64(p: u32, cap: u32, n: i64) -> PAdic {
        PAdic::from_rational(p, cap, &Rational::from_integer(BigInt::from(n)))
    }

    /// `p^val * unit + O(p^(val+prec))`; `unit` must be prime to `p`.
    pub fn approx(p: u32, cap: u32, val: i64, unit: u64, prec: u32) -> PAdic {
        let prec = prec.min(cap).max(1);
        let m = pow_u128(p, prec);
        let unit = (unit as u128 % m) as u64;
        assert!(!unit.is_multiple_of(p as u64), "approximate unit must be prime to p");
        PAdic::new(p, cap, PRepr::Approx { val, unit, prec })
    }

    pub fn indeterminate(p: u32, cap: u32, abs: i64) -> PAdic {
        PAdic::new(p, cap, PRepr::Indeterminate { abs })
    }

    fn demote_if_tall(self) -> PAdic {
        if let PRepr::Exact { unit, .. } = &self.repr {
            if unit.numer().bits() > EXACT_BITS || unit.denom().bits() > EXACT_BITS {
                return PAdic::new(self.p, self.cap, self.approx_parts(self.cap));
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, PRepr::Zero)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, PRepr::Zero | PRepr::Exact { .. })
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            PRepr::Zero => Valuation::Infinite,
            PRepr::Exact { val, .. } | PRepr::Approx { val, .. } => Valuation::Finite(*val),
            PRepr::Indeterminate { abs } => Valuation::AtLeast(*abs),
        }
    }

    /// Relative precision in digits; `None` when exact.
    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            PRepr::Approx { prec, .. } => Some(*prec),
            PRepr::Indeterminate { .. } => Some(0),
            _ => None,
        }
    }

    /// Unit part reduced mod `p^k` (exact values) or mod `p^min(k, prec)`.
    pub fn unit_mod(&self, k: u32) -> Option<u64> {
        match &self.repr {
            PRepr::Exact { unit, .. } => {
                let m = pow_u128(self.p, k);
                let mb = BigInt::from(m);
                let n = unit.numer().mod_floor(&mb).to_u128()?;
                let d = unit.denom().mod_floor(&mb).to_u128()?;
                Some(((n * inv_mod(d, m)) % m) as u64)
            }
            PRepr::Approx { unit, prec, .. } => {
                let m = pow_u128(self.p, k.min(*prec));
                Some((*unit as u128 % m) as u64)
            }
            _ => None,
        }
    }

    /// Converts to the approximate representation with `prec` relative digits.
    fn approx_parts(&self, prec: u32) -> PRepr {
        match &self.repr {
            PRepr::Exact { val, .. } => {
                let prec = prec.min(self.cap).max(1);
                PRepr::Approx { val: *val, unit: self.unit_mod(prec).unwrap(), prec }
            }
            PRepr::Approx { val, unit, prec: old } => {
                let prec = prec.min(*old);
                PRepr::Approx { val: *val, unit: (*unit as u128 % pow_u128(self.p, prec)) as u64, prec }
            }
            other => other.clone(),
        }
    }

    /// Drops exactness, keeping at most `cap` relative digits.
    pub fn to_approx(&self) -> PAdic {
        PAdic::new(self.p, self.cap, self.approx_parts(self.cap))
    }

    /// Forgets all information below `p^abs`.
    pub fn with_absolute_precision(&self, abs: i64) -> PAdic {
        match &self.repr {
            PRepr::Zero => PAdic::indeterminate(self.p, self.cap, abs),
            PRepr::Indeterminate { abs: a } => PAdic::indeterminate(self.p, self.cap, abs.min(*a)),
            PRepr::Exact { val, .. } | PRepr::Approx { val, .. } => {
                if *val >= abs {
                    PAdic::indeterminate(self.p, self.cap, abs)
                } else {
                    let prec = (abs - val).min(self.cap as i64) as u32;
                    PAdic::new(self.p, self.cap, self.approx_parts(prec))
                }
            }
        }
    }

    /// The exact rational value, if known.
    pub fn to_rational(&self) -> Option<Rational> {
        match &self.repr {
            PRepr::Zero => Some(Rational::zero()),
            PRepr::Exact { val, unit } => {
                let pp = Rational::from_integer(BigInt::from(self.p));
                let scale = if *val >= 0 {
                    num_traits::pow(pp, *val as usize)
                } else {
                    num_traits::pow(pp, (-*val) as usize).recip()
                };
                Some(unit * scale)
            }
            _ => None,
        }
    }

    /// Residue class mod `p`; `None` when the value is not integral.
    pub(crate) fn residue(&self) -> Result<Option<u32>> {
        match &self.repr {
            PRepr::Zero => Ok(Some(0)),
            PRepr::Indeterminate { abs } if *abs >= 1 => Ok(Some(0)),
            PRepr::Indeterminate { .. } => {
                Err(Error::PrecisionExhausted("residue of an indeterminate value".into()))
            }
            PRepr::Exact { val, .. } | PRepr::Approx { val, .. } => match val.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(Some(0)),
                std::cmp::Ordering::Less => Ok(None),
                std::cmp::Ordering::Equal => Ok(Some(self.unit_mod(1).unwrap() as u32)),
            },
        }
    }

    pub(crate) fn neg(&self) -> PAdic {
        let repr = match &self.repr {
            PRepr::Exact { val, unit } => PRepr::Exact { val: *val, unit: -unit },
            PRepr::Approx { val, unit, prec } => {
                let m = pow_u128(self.p, *prec);
                PRepr::Approx { val: *val, unit: (m - *unit as u128) as u64, prec: *prec }
            }
            other => other.clone(),
        };
        PAdic::new(self.p, self.cap, repr)
    }

    pub(crate) fn add(&self, other: &PAdic) -> PAdic {
        let (p, cap) = (self.p, self.cap);
        match (&self.repr, &other.repr) {
            (PRepr::Zero, _) => other.clone(),
            (_, PRepr::Zero) => self.clone(),
            (PRepr::Exact { .. }, PRepr::Exact { .. }) => {
                let s = self.to_rational().unwrap() + other.to_rational().unwrap();
                PAdic::from_rational(p, cap, &s)
            }
            (PRepr::Indeterminate { abs: a }, PRepr::Indeterminate { abs: b }) => {
                PAdic::indeterminate(p, cap, *a.min(b))
            }
            (PRepr::Indeterminate { abs }, _) => other.with_absolute_precision(*abs),
            (_, PRepr::Indeterminate { abs }) => self.with_absolute_precision(*abs),
            _ => {
                let (PRepr::Approx { val: va, unit: ua, prec: pa }, PRepr::Approx { val: vb, unit: ub, prec: pb }) =
                    (self.approx_parts(cap), other.approx_parts(cap))
                else {
                    unreachable!()
                };
                let abs = (va + pa as i64).min(vb + pb as i64);
                let m = va.min(vb);
                let k = (abs - m) as u32;
                let modk = pow_u128(p, k);
                let term = |v: i64, u: u64| -> u128 {
                    let shift = (v - m) as u32;
                    if shift >= k {
                        0
                    } else {
                        (u as u128 % modk) * pow_u128(p, shift) % modk
                    }
                };
                let s = (term(va, ua) + term(vb, ub)) % modk;
                if s == 0 {
                    return PAdic::indeterminate(p, cap, abs);
                }
                let mut s = s;
                let mut v = 0u32;
                while s.is_multiple_of(p as u128) {
                    s /= p as u128;
                    v += 1;
                }
                PAdic::new(p, cap, PRepr::Approx { val: m + v as i64, unit: s as u64, prec: k - v })
            }
        }
    }

    pub(crate) fn mul(&self, other: &PAdic) -> PAdic {
        let (p, cap) = (self.p, self.cap);
        match (&self.repr, &other.repr) {
            (PRepr::Zero, _) | (_, PRepr::Zero) => PAdic::zero(p, cap),
            (PRepr::Exact { val: va, unit: ua }, PRepr::Exact { val: vb, unit: ub }) => {
                PAdic::new(p, cap, PRepr::Exact { val: va + vb, unit: ua * ub }).demote_if_tall()
            }
            (PRepr::Indeterminate { abs: a }, PRepr::Indeterminate { abs: b }) => {
                PAdic::indeterminate(p, cap, a + b)
            }
            (PRepr::Indeterminate { abs }, x) | (x, PRepr::Indeterminate { abs }) => {
                let v = match x {
                    PRepr::Exact { val, .. } | PRepr::Approx { val, .. } => *val,
                    _ => unreachable!(),
                };
                PAdic::indeterminate(p, cap, abs + v)
            }
            _ => {
                let prec = self.precision().unwrap_or(cap).min(other.precision().unwrap_or(cap));
                let (PRepr::Approx { val: va, unit: ua, .. }, PRepr::Approx { val: vb, unit: ub, .. }) =
                    (self.approx_parts(prec), other.approx_parts(prec))
                else {
                    unreachable!()
                };
                let m = pow_u128(p, prec);
                let u = (ua as u128 * ub as u128) % m;
                PAdic::new(p, cap, PRepr::Approx { val: va + vb, unit: u as u64, prec })
            }
        }
    }

    pub(crate) fn inv(&self) -> Result<PAdic> {
        let (p, cap) = (self.p, self.cap);
        match &self.repr {
            PRepr::Zero => Err(Error::DivisionByZero),
            PRepr::Indeterminate { .. } => {
                Err(Error::PrecisionExhausted("division by an indeterminate value".into()))
            }
            PRepr::Exact { val, unit } => {
                Ok(PAdic::new(p, cap, PRepr::Exact { val: -val, unit: unit.recip() }))
            }
            PRepr::Approx { val, unit, prec } => {
                let m = pow_u128(p, *prec);
                Ok(PAdic::new(p, cap, PRepr::Approx { val: -val, unit: inv_mod(*unit as u128, m) as u64, prec: *prec }))
            }
        }
    }

    /// Coarse check used by the parser: exact value equals the integer `n`.
    pub fn equals_int(&self, n: i64) -> bool {
        self.to_rational().is_some_and(|q| q == Rational::from_integer(BigInt::from(n)))
    }

    pub(crate) fn display(&self) -> String {
        match &self.repr {
            PRepr::Zero => "0".to_string(),
            PRepr::Exact { .. } => {
                let q = self.to_rational().unwrap();
                if q.is_integer() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            PRepr::Approx { val, unit, prec } => {
                format!("{}^{} * {} + O({}^{})", self.p, val, unit, self.p, val + *prec as i64)
            }
            PRepr::Indeterminate { abs } => format!("O({}^{})", self.p, abs),
        }
    }
}

impl PartialEq<i64> for PAdic {
    fn eq(&self, other: &i64) -> bool {
        self.equals_int(*other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(n: i64) -> PAdic {
        PAdic::from_i64(5, 6, n)
    }

    #[test]
    fn exact_canonical_form() {
        let x = pa(75);
        assert_eq!(x.valuation(), Valuation::Finite(2));
        assert_eq!(x.unit_mod(1), Some(3));
        let y = x.mul(&pa(5));
        assert_eq!(y.valuation(), Valuation::Finite(3));
        assert_eq!(y.unit_mod(4), Some(3));
    }

    #[test]
    fn exact_cancellation_is_exact_zero() {
        assert!(pa(6).add(&pa(-6)).is_zero());
    }

    #[test]
    fn approximate_cancellation_is_indeterminate() {
        let a = pa(7).to_approx();
        let b = pa(-7).to_approx();
        let s = a.add(&b);
        assert_eq!(s.valuation(), Valuation::AtLeast(6));
        assert!(s.residue().unwrap() == Some(0));
        assert!(matches!(s.inv(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn approx_arithmetic_matches_exact_mod_precision() {
        let a = pa(123).to_approx();
        let b = PAdic::from_rational(5, 6, &Rational::new(BigInt::from(2), BigInt::from(3))).to_approx();
        let prod = a.mul(&b).add(&pa(-82).to_approx());
        // 123 * 2/3 - 82 = 0 exactly, so only an O(5^6) remains
        assert!(matches!(prod.valuation(), Valuation::AtLeast(k) if k >= 6));
        let q = a.mul(&b.inv().unwrap());
        let back = q.mul(&b);
        assert_eq!(back.unit_mod(6), pa(123).unit_mod(6));
    }

    #[test]
    fn residue_cases() {
        assert_eq!(pa(75).residue().unwrap(), Some(0));
        assert_eq!(pa(7).residue().unwrap(), Some(2));
        let fifth = PAdic::from_rational(5, 6, &Rational::new(BigInt::from(1), BigInt::from(5)));
        assert_eq!(fifth.residue().unwrap(), None);
    }

    #[test]
    fn absolute_precision_truncation() {
        let x = pa(1 + 5 + 25 * 3);
        let t = x.with_absolute_precision(2);
        assert_eq!(t.precision(), Some(2));
        assert_eq!(t.unit_mod(2), Some(6));
        assert!(matches!(pa(125).with_absolute_precision(2).valuation(), Valuation::AtLeast(2)));
    }
}
