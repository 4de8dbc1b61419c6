//! Classical points of the projective line and the chordal distance.

use std::fmt;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::scalar::{Backend, LogReal, Scalar, Valuation};

/// `π(p0, p1)`, the point `z = p1/p0`; `∞ = π(0, 1)`.
///
/// Stored normalized: Euclidean norm 1 over `C`, and over non-archimedean
/// fields one coordinate is exactly `1` and the other has `|.| <= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint {
    p0: Scalar,
    p1: Scalar,
}

/// Which coordinate dominates, given both valuations.
fn dominant(v0: Valuation, v1: Valuation) -> Result<bool> {
    use Valuation::*;
    // true: p0 dominates
    match (v0, v1) {
        (Infinite, Infinite) => invalid("(0, 0) is not a projective point"),
        (_, Infinite) => Ok(true),
        (Infinite, _) => Ok(false),
        (Finite(a), Finite(b)) => Ok(a <= b),
        (Finite(a), AtLeast(b)) if a < b => Ok(true),
        (AtLeast(a), Finite(b)) if b < a => Ok(false),
        _ => Err(Error::PrecisionExhausted("cannot decide the dominant coordinate".into())),
    }
}

impl ProjectivePoint {
    pub fn new(p0: Scalar, p1: Scalar) -> Result<ProjectivePoint> {
        let b = p0.backend();
        b.check(&p1)?;
        if b.is_archimedean() {
            let (a, c) = (p0.as_complex().unwrap(), p1.as_complex().unwrap());
            let n = a.norm().hypot(c.norm());
            if n == 0.0 || !n.is_finite() {
                return invalid("projective point must be nonzero and finite");
            }
            return Ok(ProjectivePoint { p0: Scalar::Complex(a / n), p1: Scalar::Complex(c / n) });
        }
        if dominant(p0.valuation()?, p1.valuation()?)? {
            let p1 = p1.try_div(&p0)?;
            Ok(ProjectivePoint { p0: b.one(), p1 })
        } else {
            let p0 = p0.try_div(&p1)?;
            Ok(ProjectivePoint { p0, p1: b.one() })
        }
    }

    /// Complex point from a homogeneous pair that may be badly scaled.
    pub(crate) fn from_complex_pair(a: Complex64, c: Complex64) -> Result<ProjectivePoint> {
        let s = a.norm().max(c.norm());
        if s == 0.0 || !s.is_finite() {
            return Err(Error::PrecisionExhausted("complex lift vanished or overflowed".into()));
        }
        ProjectivePoint::new(Scalar::Complex(a / s), Scalar::Complex(c / s))
    }

    pub fn affine(z: Scalar) -> ProjectivePoint {
        let one = z.backend().one();
        ProjectivePoint::new(one, z).expect("affine points are always valid")
    }

    pub fn infinity(b: Backend) -> ProjectivePoint {
        ProjectivePoint::new(b.zero(), b.one()).unwrap()
    }

    pub fn complex(z: Complex64) -> ProjectivePoint {
        ProjectivePoint::affine(Scalar::Complex(z))
    }

    pub fn backend(&self) -> Backend {
        self.p0.backend()
    }

    pub fn coords(&self) -> (&Scalar, &Scalar) {
        (&self.p0, &self.p1)
    }

    pub fn is_infinity(&self) -> bool {
        self.p0.is_zero()
    }

    /// Affine coordinate `p1/p0`, `None` at infinity.
    pub fn affine_value(&self) -> Option<Scalar> {
        if self.is_infinity() {
            None
        } else {
            Some(self.p1.try_div(&self.p0).ok()?)
        }
    }

    pub fn wedge(&self, other: &ProjectivePoint) -> Result<Scalar> {
        self.backend().check(&other.p0)?;
        Ok(&(&self.p0 * &other.p1) - &(&self.p1 * &other.p0))
    }

    /// `log [z, w]`; representatives are normalized so this is `log |p ∧ q|`.
    pub fn log_chordal(&self, other: &ProjectivePoint) -> Result<LogReal> {
        let w = self.wedge(other)?;
        if let Scalar::Complex(c) = w {
            let n = c.norm().min(1.0);
            return Ok(if n == 0.0 { LogReal::NegInf } else { LogReal::Real(n.ln()) });
        }
        w.log_abs()
    }

    pub fn chordal(&self, other: &ProjectivePoint) -> Result<f64> {
        Ok(self.log_chordal(other)?.exp())
    }

    /// Text form: `inf`, `z=<scalar>` or a bare scalar.
    pub fn parse(backend: Backend, s: &str) -> Result<ProjectivePoint> {
        let s = s.trim();
        if s == "inf" || s == "∞" {
            return Ok(ProjectivePoint::infinity(backend));
        }
        let body = s.strip_prefix("z=").or_else(|| s.strip_prefix("z =")).unwrap_or(s);
        Ok(ProjectivePoint::affine(backend.parse_scalar(body.trim())?))
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.affine_value() {
            None => write!(f, "inf"),
            Some(z) => write!(f, "z={z}"),
        }
    }
}
