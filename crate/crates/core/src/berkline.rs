//! Berkovich points of types I-III, joins, diameters, the Hsia kernel, and
//! Gauss seminorms of polynomials on disks.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{unsupported, Error, Result};
use crate::poly::Poly;
use crate::projline::ProjectivePoint;
use crate::scalar::{Backend, LogReal, Rational, Scalar};

/// A point of the Berkovich projective line.
///
/// Infinity is `Classical` at `π(0, 1)`. Disks carry a log-radius; a disk of
/// radius 0 is normalized to its classical center.
#[derive(Clone, Debug)]
pub enum BerkPoint {
    Classical(ProjectivePoint),
    Disk { center: Scalar, log_radius: LogReal },
}

impl BerkPoint {
    pub fn classical(z: Scalar) -> BerkPoint {
        BerkPoint::Classical(ProjectivePoint::affine(z))
    }

    pub fn infinity(b: Backend) -> BerkPoint {
        BerkPoint::Classical(ProjectivePoint::infinity(b))
    }

    pub fn disk(center: Scalar, log_radius: LogReal) -> Result<BerkPoint> {
        if center.backend().is_archimedean() {
            return unsupported("Berkovich disks over an archimedean field");
        }
        if center.is_indeterminate() {
            return Err(Error::PrecisionExhausted("disk center is indeterminate".into()));
        }
        if log_radius.is_neg_inf() {
            return Ok(BerkPoint::classical(center));
        }
        if !log_radius.to_f64().is_finite() {
            return Err(Error::InvalidArgument("disk radius must be finite".into()));
        }
        Ok(BerkPoint::Disk { center, log_radius })
    }

    /// `B(center, p^(-v))`, i.e. log-radius `-v log p` kept exact.
    pub fn disk_vp(center: Scalar, v: Rational) -> Result<BerkPoint> {
        let p = center
            .backend()
            .prime()
            .ok_or_else(|| Error::Unsupported("Berkovich disks over an archimedean field".into()))?;
        BerkPoint::disk(center, LogReal::from_valuation(v, p))
    }

    pub fn gauss(b: Backend) -> Result<BerkPoint> {
        let p = b.prime().ok_or_else(|| Error::Unsupported("Gauss point over C".into()))?;
        BerkPoint::disk(b.zero(), LogReal::zero_val(p))
    }

    pub fn backend(&self) -> Backend {
        match self {
            BerkPoint::Classical(z) => z.backend(),
            BerkPoint::Disk { center, .. } => center.backend(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, BerkPoint::Classical(z) if z.is_infinity())
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, BerkPoint::Classical(_))
    }

    /// Type II when the radius lies in the value group `p^Q`, else type III.
    pub fn point_type(&self) -> u8 {
        match self {
            BerkPoint::Classical(_) => 1,
            BerkPoint::Disk { log_radius: LogReal::Val { .. }, .. } => 2,
            BerkPoint::Disk { .. } => 3,
        }
    }

    /// `(center, log radius)` for finite points; classical points have radius 0.
    fn as_disk(&self) -> Result<(Scalar, LogReal)> {
        match self {
            BerkPoint::Disk { center, log_radius } => Ok((center.clone(), log_radius.clone())),
            BerkPoint::Classical(z) => match z.affine_value() {
                Some(a) => Ok((a, LogReal::NegInf)),
                None => Err(Error::InvalidArgument("the point at infinity has no disk".into())),
            },
        }
    }

    fn check_nonarch(&self) -> Result<()> {
        if self.backend().is_archimedean() {
            unsupported("Berkovich operations over an archimedean field")
        } else {
            Ok(())
        }
    }

    /// Smallest disk containing both points.
    pub fn join(&self, other: &BerkPoint) -> Result<BerkPoint> {
        self.check_nonarch()?;
        self.backend().check(&other.backend().zero())?;
        let (a, r) = self.as_disk()?;
        let (b, s) = other.as_disk()?;
        let rs = r.max(s);
        let d = a.try_sub(&b)?;
        let dist = if d.is_indeterminate() {
            let bound = d.log_abs_upper();
            if bound <= rs && !rs.is_neg_inf() {
                LogReal::NegInf
            } else {
                return Err(Error::PrecisionExhausted("distance between centers is indeterminate".into()));
            }
        } else {
            d.log_abs()?
        };
        BerkPoint::disk(a, rs.max(dist))
    }

    /// `log diam(S)`: `-inf` for classical points.
    pub fn log_diam(&self) -> Result<LogReal> {
        match self {
            _ if self.is_infinity() => Err(Error::InvalidArgument("diam(∞) is undefined".into())),
            BerkPoint::Classical(_) => Ok(LogReal::NegInf),
            BerkPoint::Disk { log_radius, .. } => Ok(log_radius.clone()),
        }
    }

    pub fn diam(&self) -> Result<f64> {
        Ok(self.log_diam()?.exp())
    }

    /// `log |S| = log diam(S ∧ 0)`.
    pub fn log_abs(&self) -> Result<LogReal> {
        let zero = BerkPoint::classical(self.backend().zero());
        self.join(&zero)?.log_diam()
    }

    /// `log [S, T]_can`.
    pub fn log_hsia(&self, other: &BerkPoint) -> Result<LogReal> {
        self.check_nonarch()?;
        let p = self.backend().prime().unwrap();
        let zero = LogReal::zero_val(p);
        match (self.is_infinity(), other.is_infinity()) {
            (true, true) => return Ok(LogReal::NegInf),
            (true, false) => return Ok(LogReal::zero_val(p).sub(&other.log_abs()?.max(zero))),
            (false, true) => return Ok(LogReal::zero_val(p).sub(&self.log_abs()?.max(zero))),
            _ => {}
        }
        let j = self.join(other)?.log_diam()?;
        let ns = self.log_abs()?.max(zero.clone());
        let nt = other.log_abs()?.max(zero);
        Ok(j.add(&LogReal::zero_val(p).sub(&ns)).add(&LogReal::zero_val(p).sub(&nt)))
    }

    pub fn hsia(&self, other: &BerkPoint) -> Result<f64> {
        Ok(self.log_hsia(other)?.exp())
    }

    /// Same point of the Berkovich line (exactly decided).
    pub fn same_point(&self, other: &BerkPoint) -> Result<bool> {
        match (self, other) {
            (BerkPoint::Classical(a), BerkPoint::Classical(b)) => Ok(a.log_chordal(b)?.is_neg_inf()),
            (BerkPoint::Disk { .. }, BerkPoint::Disk { .. }) => {
                let j = self.join(other)?;
                Ok(j.log_diam()? == self.log_diam()? && j.log_diam()? == other.log_diam()?)
            }
            _ => Ok(false),
        }
    }

    /// Text forms: `pt(<scalar>)`, `disk(<center>, <log-radius>)`,
    /// `disk(<center>, vp=<rational>)`, `inf`, `gauss`, or a bare classical point.
    pub fn parse(b: Backend, s: &str) -> Result<BerkPoint> {
        let s = s.trim();
        if s == "gauss" {
            return BerkPoint::gauss(b);
        }
        if let Some(inner) = s.strip_prefix("pt(").and_then(|r| r.strip_suffix(')')) {
            return Ok(BerkPoint::Classical(ProjectivePoint::parse(b, inner)?));
        }
        if let Some(inner) = s.strip_prefix("disk(").and_then(|r| r.strip_suffix(')')) {
            let (c, r) = inner
                .rsplit_once(',')
                .ok_or_else(|| Error::Parse(format!("disk needs a center and a radius: {s:?}")))?;
            let center = b.parse_scalar(c.trim())?;
            let r = r.trim();
            if let Some(v) = r.strip_prefix("vp=") {
                let v: Rational = parse_rational(v.trim())?;
                return BerkPoint::disk_vp(center, v);
            }
            let lr: f64 = r.parse().map_err(|_| Error::Parse(format!("bad log-radius {r:?}")))?;
            let lr = if lr == f64::NEG_INFINITY { LogReal::NegInf } else { LogReal::Real(lr) };
            return BerkPoint::disk(center, lr);
        }
        Ok(BerkPoint::Classical(ProjectivePoint::parse(b, s)?))
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BerkPoint::Classical(z) if z.is_infinity() => write!(f, "inf"),
            BerkPoint::Classical(z) => write!(f, "pt({z})"),
            BerkPoint::Disk { center, log_radius } => match log_radius.exact_repr() {
                Some(r) => write!(f, "disk({center}, {r})"),
                None => write!(f, "disk({center}, {})", log_radius.to_f64()),
            },
        }
    }
}

/// `log max_k |c_k| r^k` for the Taylor coefficients `c_k` of `poly` at the
/// center of `S`. Exact for exact inputs. Zero polynomials give `-inf`.
pub fn gauss_seminorm(poly: &Poly, center: &Scalar, log_r: &LogReal) -> Result<LogReal> {
    if poly.backend().is_archimedean() {
        return unsupported("Gauss seminorms over an archimedean field");
    }
    if poly.is_zero() {
        return Ok(LogReal::NegInf);
    }
    // B(a, r) = B(0, r) whenever |a| <= r
    let shifted;
    let q = if center.is_zero() || center.log_abs_upper() <= *log_r {
        poly
    } else {
        shifted = poly.taylor_shift(center);
        &shifted
    };
    let mut best = LogReal::NegInf;
    let mut undetermined = LogReal::NegInf;
    for (k, c) in q.terms() {
        let term = |l: LogReal| if k == 0 { l } else { l.add(&log_r.scale_int(k as u64)) };
        if c.is_indeterminate() {
            undetermined = undetermined.max(term(c.log_abs_upper()));
        } else {
            best = best.max(term(c.log_abs()?));
        }
    }
    if !undetermined.is_neg_inf() && undetermined >= best {
        return Err(Error::PrecisionExhausted("seminorm dominated by lost digits".into()));
    }
    Ok(best)
}

/// `gauss_seminorm` at a Berkovich point; classical points evaluate directly.
pub fn seminorm_at(poly: &Poly, s: &BerkPoint) -> Result<LogReal> {
    match s {
        BerkPoint::Disk { center, log_radius } => gauss_seminorm(poly, center, log_radius),
        BerkPoint::Classical(z) => {
            let a = z.affine_value().ok_or_else(|| Error::InvalidArgument("seminorm at infinity".into()))?;
            let v = poly.eval(&a);
            if v.is_indeterminate() {
                return Err(Error::PrecisionExhausted("polynomial value is indeterminate".into()));
            }
            v.log_abs()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q5() -> Backend {
        Backend::padic(5, 12).unwrap()
    }

    fn disk(b: Backend, c: i64, v: i64) -> BerkPoint {
        BerkPoint::disk_vp(b.from_i64(c), Rational::from_integer(v.into())).unwrap()
    }

    #[test]
    fn join_examples() {
        let b = q5();
        let j = disk(b, 0, 1).join(&disk(b, 1, 1)).unwrap();
        assert!(j.same_point(&BerkPoint::gauss(b).unwrap()).unwrap());
        let s = disk(b, 3, 2);
        assert!(s.join(&s).unwrap().same_point(&s).unwrap());
        let c0 = BerkPoint::classical(b.zero());
        assert!(c0.join(&disk(b, 0, 1)).unwrap().same_point(&disk(b, 0, 1)).unwrap());
    }

    #[test]
    fn diam_examples() {
        let b = q5();
        assert_eq!(BerkPoint::gauss(b).unwrap().diam().unwrap(), 1.0);
        assert_eq!(BerkPoint::classical(b.from_i64(4)).diam().unwrap(), 0.0);
        assert!((disk(b, 3, 2).diam().unwrap() - 1.0 / 25.0).abs() < 1e-16);
        assert!(BerkPoint::infinity(b).diam().is_err());
    }

    #[test]
    fn hsia_examples() {
        let b = q5();
        let g = BerkPoint::gauss(b).unwrap();
        assert_eq!(g.log_hsia(&g).unwrap(), LogReal::zero_val(5));
        let c0 = BerkPoint::classical(b.zero());
        assert_eq!(disk(b, 0, 2).log_hsia(&c0).unwrap(), LogReal::from_int_valuation(2, 5));
        let c5 = BerkPoint::classical(b.from_i64(5));
        assert_eq!(c5.log_hsia(&c0).unwrap(), LogReal::from_int_valuation(1, 5));
        // agrees with the chordal distance, including at infinity and far points
        let big = BerkPoint::classical(b.from_rational(&Rational::new(1.into(), 25.into())).unwrap());
        let inf = BerkPoint::infinity(b);
        let (BerkPoint::Classical(x), BerkPoint::Classical(y)) = (&big, &c5) else { panic!() };
        assert_eq!(big.log_hsia(&c5).unwrap(), x.log_chordal(y).unwrap());
        let BerkPoint::Classical(i) = &inf else { panic!() };
        assert_eq!(big.log_hsia(&inf).unwrap(), x.log_chordal(i).unwrap());
        assert!(inf.log_hsia(&inf).unwrap().is_neg_inf());
    }

    #[test]
    fn seminorm_examples() {
        let b = q5();
        let z2 = Poly::monomial(b.one(), 2);
        let lr = LogReal::from_int_valuation(3, 5);
        assert_eq!(gauss_seminorm(&z2, &b.zero(), &lr).unwrap(), lr.scale_int(2));
        let zm1 = Poly::from_coeffs(b, vec![b.from_i64(-1), b.one()]);
        assert_eq!(gauss_seminorm(&zm1, &b.zero(), &LogReal::zero_val(5)).unwrap(), LogReal::zero_val(5));
        let p = Poly::from_coeffs(b, vec![b.from_i64(-5), b.zero(), b.one()]);
        assert_eq!(
            gauss_seminorm(&p, &b.zero(), &LogReal::from_int_valuation(1, 5)).unwrap(),
            LogReal::from_int_valuation(1, 5)
        );
        assert!(gauss_seminorm(&Poly::zero(b), &b.zero(), &lr).unwrap().is_neg_inf());
    }

    #[test]
    fn parse_forms() {
        let b = q5();
        assert_eq!(BerkPoint::parse(b, "gauss").unwrap().point_type(), 2);
        let d = BerkPoint::parse(b, "disk(3, vp=2)").unwrap();
        assert_eq!(d.to_string(), "disk(3, vp=2)");
        assert_eq!(BerkPoint::parse(b, "disk(0, -0.5)").unwrap().point_type(), 3);
        assert!(BerkPoint::parse(b, "inf").unwrap().is_infinity());
        assert!(BerkPoint::parse(b, "pt(7)").unwrap().is_classical());
    }

    fn arb_point() -> impl Strategy<Value = BerkPoint> {
        (-2i64..3, -40i64..40, prop_oneof![Just(None), (-1i64..4).prop_map(Some)]).prop_map(|(v, u, r)| {
            let b = q5();
            let c = b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap();
            match r {
                None => BerkPoint::classical(c),
                Some(r) => BerkPoint::disk_vp(c, Rational::from_integer(r.into())).unwrap(),
            }
        })
    }

    proptest! {
        #[test]
        fn join_lattice_laws(s in arb_point(), t in arb_point(), u in arb_point()) {
            let st = s.join(&t).unwrap();
            prop_assert!(st.same_point(&t.join(&s).unwrap()).unwrap());
            prop_assert!(st.join(&u).unwrap().same_point(&s.join(&t.join(&u).unwrap()).unwrap()).unwrap());
            prop_assert!(s.join(&s).unwrap().same_point(&s).unwrap());
        }

        #[test]
        fn hsia_bounds(s in arb_point(), t in arb_point()) {
            let h = s.log_hsia(&t).unwrap();
            prop_assert!(h.to_f64() <= 1e-12);
            prop_assert_eq!(h.clone(), t.log_hsia(&s).unwrap());
            let same = s.same_point(&t).unwrap();
            prop_assert_eq!(h.is_neg_inf(), same && s.is_classical());
        }

        #[test]
        fn seminorm_monotone_and_multiplicative(c1 in proptest::collection::vec(-30i64..30, 1..5), c2 in proptest::collection::vec(-30i64..30, 1..5),
                                                 a in -20i64..20, r1 in 0i64..4, dr in 0i64..3) {
            let b = q5();
            let mk = |c: &Vec<i64>| Poly::from_coeffs(b, c.iter().map(|&x| b.from_i64(x)).collect());
            let (p, q) = (mk(&c1), mk(&c2));
            prop_assume!(!p.is_zero() && !q.is_zero());
            let center = b.from_i64(a);
            let small = LogReal::from_int_valuation(r1 + dr, 5);
            let large = LogReal::from_int_valuation(r1, 5);
            let sp = gauss_seminorm(&p, &center, &small).unwrap();
            prop_assert!(sp <= gauss_seminorm(&p, &center, &large).unwrap());
            let pq = gauss_seminorm(&p.mul(&q), &center, &large).unwrap();
            prop_assert_eq!(pq, gauss_seminorm(&p, &center, &large).unwrap().add(&gauss_seminorm(&q, &center, &large).unwrap()));
        }
    }

    #[test]
    fn seminorm_tends_to_value_as_radius_shrinks() {
        let b = q5();
        let p = Poly::from_coeffs(b, vec![b.from_i64(-7), b.from_i64(1), b.one()]);
        let a = b.from_i64(2);
        let v = p.eval(&a).log_abs().unwrap();
        let s = gauss_seminorm(&p, &a, &LogReal::from_int_valuation(20, 5)).unwrap();
        assert_eq!(s, v);
    }
}
