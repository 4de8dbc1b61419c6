//! Truncated Laurent series over `F_p`.
//!
//! Same precision model as the p-adic backend: exact Laurent polynomials,
//! approximations carrying `prec` relative coefficients, and indeterminate
//! `O(t^abs)` values.

use super::Valuation;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum LRepr {
    Zero,
    /// `t^val * (c_0 + c_1 t + ...)` with `c_0 != 0`.
    /// Exact: `coeffs` is the full (finite) expansion, trailing zeros trimmed.
    /// Approximate: `coeffs.len()` is the relative precision.
    Series { val: i64, coeffs: Vec<u32>, exact: bool },
    Indeterminate { abs: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Laurent {
    pub(crate) p: u32,
    pub(crate) cap: u32,
    pub(crate) repr: LRepr,
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    // p is a small prime: Fermat
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

impl Laurent {
    fn exact_limit(&self) -> usize {
        (4 * self.cap as usize).max(64)
    }

    pub fn zero(p: u32, cap: u32) -> Laurent {
        Laurent { p, cap, repr: LRepr::Zero }
    }

    pub fn indeterminate(p: u32, cap: u32, abs: i64) -> Laurent {
        Laurent { p, cap, repr: LRepr::Indeterminate { abs } }
    }

    /// Builds `t^val * sum coeffs[i] t^i`, normalizing leading zeros.
    /// `exact == false` means the expansion is known to `coeffs.len()` terms.
    pub fn from_coeffs(p: u32, cap: u32, val: i64, coeffs: &[i64], exact: bool) -> Laurent {
        let c: Vec<u32> = coeffs.iter().map(|&x| x.rem_euclid(p as i64) as u32).collect();
        Laurent::normalize(p, cap, val, c, exact)
    }

    pub fn from_i64(p: u32, cap: u32, n: i64) -> Laurent {
        Laurent::from_coeffs(p, cap, 0, &[n], true)
    }

    /// The monomial `t^k`.
    pub fn t_pow(p: u32, cap: u32, k: i64) -> Laurent {
        Laurent::from_coeffs(p, cap, k, &[1], true)
    }

    fn normalize(p: u32, cap: u32, val: i64, mut coeffs: Vec<u32>, exact: bool) -> Laurent {
        let lead = coeffs.iter().position(|&c| c != 0);
        let Some(z) = lead else {
            return if exact {
                Laurent::zero(p, cap)
            } else {
                Laurent::indeterminate(p, cap, val + coeffs.len() as i64)
            };
        };
        coeffs.drain(..z);
        let val = val + z as i64;
        if exact {
            while coeffs.last() == Some(&0) {
                coeffs.pop();
            }
        } else {
            coeffs.truncate(cap as usize);
        }
        let mut out = Laurent { p, cap, repr: LRepr::Series { val, coeffs, exact } };
        if exact {
            if let LRepr::Series { coeffs, .. } = &out.repr {
                if coeffs.len() > out.exact_limit() {
                    out = out.to_approx();
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, LRepr::Zero)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, LRepr::Zero | LRepr::Series { exact: true, .. })
    }

    pub fn valuation(&self) -> Valuation {
        match &self.repr {
            LRepr::Zero => Valuation::Infinite,
            LRepr::Series { val, .. } => Valuation::Finite(*val),
            LRepr::Indeterminate { abs } => Valuation::AtLeast(*abs),
        }
    }

    pub fn precision(&self) -> Option<u32> {
        match &self.repr {
            LRepr::Series { coeffs, exact: false, .. } => Some(coeffs.len() as u32),
            LRepr::Indeterminate { .. } => Some(0),
            _ => None,
        }
    }

    /// Coefficients of the unit part (`c_0, c_1, ...`).
    pub fn unit_coeffs(&self) -> &[u32] {
        match &self.repr {
            LRepr::Series { coeffs, .. } => coeffs,
            _ => &[],
        }
    }

    /// Absolute precision: `None` for exact values.
    fn abs_prec(&self) -> Option<i64> {
        match &self.repr {
            LRepr::Zero | LRepr::Series { exact: true, .. } => None,
            LRepr::Series { val, coeffs, .. } => Some(val + coeffs.len() as i64),
            LRepr::Indeterminate { abs } => Some(*abs),
        }
    }

    pub fn to_approx(&self) -> Laurent {
        match &self.repr {
            LRepr::Series { val, coeffs, exact: true } => {
                let mut c = coeffs.clone();
                c.resize(self.cap as usize, 0);
                c.truncate(self.cap as usize);
                Laurent { p: self.p, cap: self.cap, repr: LRepr::Series { val: *val, coeffs: c, exact: false } }
            }
            _ => self.clone(),
        }
    }

    pub fn with_absolute_precision(&self, abs: i64) -> Laurent {
        let (p, cap) = (self.p, self.cap);
        match &self.repr {
            LRepr::Zero => Laurent::indeterminate(p, cap, abs),
            LRepr::Indeterminate { abs: a } => Laurent::indeterminate(p, cap, abs.min(*a)),
            LRepr::Series { val, coeffs, exact } => {
                if *val >= abs {
                    return Laurent::indeterminate(p, cap, abs);
                }
                let mut len = ((abs - val) as usize).min(cap as usize);
                if !exact {
                    len = len.min(coeffs.len());
                }
                let mut c = coeffs.clone();
                c.resize(len, 0);
                Laurent { p, cap, repr: LRepr::Series { val: *val, coeffs: c, exact: false } }
            }
        }
    }

    pub(crate) fn residue(&self) -> Result<Option<u32>> {
        match &self.repr {
            LRepr::Zero => Ok(Some(0)),
            LRepr::Indeterminate { abs } if *abs >= 1 => Ok(Some(0)),
            LRepr::Indeterminate { .. } => {
                Err(Error::PrecisionExhausted("residue of an indeterminate value".into()))
            }
            LRepr::Series { val, coeffs, .. } => match val.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(Some(0)),
                std::cmp::Ordering::Less => Ok(None),
                std::cmp::Ordering::Equal => Ok(Some(coeffs[0])),
            },
        }
    }

    pub(crate) fn neg(&self) -> Laurent {
        match &self.repr {
            LRepr::Series { val, coeffs, exact } => Laurent {
                p: self.p,
                cap: self.cap,
                repr: LRepr::Series {
                    val: *val,
                    coeffs: coeffs.iter().map(|&c| if c == 0 { 0 } else { self.p - c }).collect(),
                    exact: *exact,
                },
            },
            _ => self.clone(),
        }
    }

    pub(crate) fn add(&self, other: &Laurent) -> Laurent {
        let (p, cap) = (self.p, self.cap);
        match (&self.repr, &other.repr) {
            (LRepr::Zero, _) => other.clone(),
            (_, LRepr::Zero) => self.clone(),
            (LRepr::Indeterminate { abs: a }, LRepr::Indeterminate { abs: b }) => {
                Laurent::indeterminate(p, cap, *a.min(b))
            }
            (LRepr::Indeterminate { abs }, _) => other.with_absolute_precision(*abs),
            (_, LRepr::Indeterminate { abs }) => self.with_absolute_precision(*abs),
            (
                LRepr::Series { val: va, coeffs: ca, .. },
                LRepr::Series { val: vb, coeffs: cb, .. },
            ) => {
                let m = *va.min(vb);
                let abs = match (self.abs_prec(), other.abs_prec()) {
                    (None, None) => None,
                    (Some(a), None) | (None, Some(a)) => Some(a),
                    (Some(a), Some(b)) => Some(a.min(b)),
                };
                let end = abs.unwrap_or_else(|| (va + ca.len() as i64).max(vb + cb.len() as i64));
                let len = (end - m) as usize;
                let mut out = vec![0u32; len];
                for (v, c) in [(va, ca), (vb, cb)] {
                    let off = (v - m) as usize;
                    for (i, &x) in c.iter().enumerate() {
                        if off + i >= len {
                            break;
                        }
                        out[off + i] = (out[off + i] + x) % p;
                    }
                }
                Laurent::normalize(p, cap, m, out, abs.is_none())
            }
        }
    }

    pub(crate) fn mul(&self, other: &Laurent) -> Laurent {
        let (p, cap) = (self.p, self.cap);
        match (&self.repr, &other.repr) {
            (LRepr::Zero, _) | (_, LRepr::Zero) => Laurent::zero(p, cap),
            (LRepr::Indeterminate { abs: a }, LRepr::Indeterminate { abs: b }) => {
                Laurent::indeterminate(p, cap, a + b)
            }
            (LRepr::Indeterminate { abs }, LRepr::Series { val, .. })
            | (LRepr::Series { val, .. }, LRepr::Indeterminate { abs }) => {
                Laurent::indeterminate(p, cap, abs + val)
            }
            (
                LRepr::Series { val: va, coeffs: ca, exact: ea },
                LRepr::Series { val: vb, coeffs: cb, exact: eb },
            ) => {
                let exact = *ea && *eb;
                let len = if exact {
                    ca.len() + cb.len() - 1
                } else {
                    let pa = if *ea { usize::MAX } else { ca.len() };
                    let pb = if *eb { usize::MAX } else { cb.len() };
                    pa.min(pb).min(cap as usize)
                };
                let mut out = vec![0u64; len];
                for (i, &x) in ca.iter().enumerate().take(len) {
                    if x == 0 {
                        continue;
                    }
                    for (j, &y) in cb.iter().enumerate().take(len - i) {
                        out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
                    }
                }
                let out = out.into_iter().map(|x| x as u32).collect();
                Laurent::normalize(p, cap, va + vb, out, exact)
            }
        }
    }

    pub(crate) fn inv(&self) -> Result<Laurent> {
        let (p, cap) = (self.p, self.cap);
        match &self.repr {
            LRepr::Zero => Err(Error::DivisionByZero),
            LRepr::Indeterminate { .. } => {
                Err(Error::PrecisionExhausted("division by an indeterminate value".into()))
            }
            LRepr::Series { val, coeffs, exact } => {
                let c0inv = inv_mod_p(coeffs[0], p);
                if *exact && coeffs.len() == 1 {
                    return Ok(Laurent::normalize(p, cap, -val, vec![c0inv], true));
                }
                let n = if *exact { cap as usize } else { coeffs.len().min(cap as usize) };
                let mut b = vec![0u32; n];
                b[0] = c0inv;
                for k in 1..n {
                    let mut s = 0u64;
                    for i in 1..=k.min(coeffs.len() - 1) {
                        s += coeffs[i] as u64 * b[k - i] as u64;
                    }
                    let s = (s % p as u64) as u32;
                    b[k] = ((p - s) % p) as u64 as u32 * c0inv % p;
                }
                Ok(Laurent::normalize(p, cap, -val, b, false))
            }
        }
    }

    pub(crate) fn display(&self) -> String {
        match &self.repr {
            LRepr::Zero => "0".to_string(),
            LRepr::Indeterminate { abs } => format!("O(t^{abs})"),
            LRepr::Series { val, coeffs, exact } => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, c)| match i {
                        0 => format!("{c}"),
                        1 => format!("{c}*t"),
                        _ => format!("{c}*t^{i}"),
                    })
                    .collect();
                let mut s = format!("t^{}*({})", val, terms.join(" + "));
                if !exact {
                    s.push_str(&format!(" + O(t^{})", val + coeffs.len() as i64));
                }
                s
            }
        }
    }
}
