use num_traits::Zero;

use crate::error::{unsupported, Error, Result};
use crate::poly::Poly;
use crate::scalar::{Rational, Valuation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub slope: Rational,
    pub length: usize,
}

/// Lower convex hull of `(i, v(c_i))`; a segment of slope `-m` and length `l`
/// accounts for `l` roots of valuation `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub segments: Vec<Segment>,
    /// Multiplicity of the root `0` (the low-order zero coefficients).
    pub zero_multiplicity: usize,
}

impl NewtonPolygon {
    /// Root valuations with multiplicity, increasing; the root `0` is omitted.
    pub fn valuations(&self) -> Vec<(Rational, usize)> {
        let mut v: Vec<(Rational, usize)> = self.segments.iter().map(|s| (-s.slope.clone(), s.length)).collect();
        v.reverse();
        v
    }

    pub fn nonzero_root_count(&self) -> usize {
        self.segments.iter().map(|s| s.length).sum()
    }
}

fn cross(o: &(usize, Rational), a: &(usize, Rational), b: &(usize, Rational)) -> Rational {
    let (ax, ay) = (Rational::from_integer((a.0 as i64 - o.0 as i64).into()), &a.1 - &o.1);
    let (bx, by) = (Rational::from_integer((b.0 as i64 - o.0 as i64).into()), &b.1 - &o.1);
    ax * by - ay * bx
}

pub fn newton_polygon(poly: &Poly) -> Result<NewtonPolygon> {
    if poly.backend().is_archimedean() {
        return unsupported("Newton polygons over C");
    }
    if poly.is_zero() {
        return Err(Error::InvalidArgument("the zero polynomial has no Newton polygon".into()));
    }
    let mut known: Vec<(usize, Rational)> = Vec::new();
    let mut bounds: Vec<(usize, Rational)> = Vec::new();
    for (k, c) in poly.terms() {
        match c.valuation()? {
            Valuation::Finite(v) => known.push((k, Rational::from_integer(v.into()))),
            Valuation::AtLeast(v) => bounds.push((k, Rational::from_integer(v.into()))),
            Valuation::Infinite => {}
        }
    }
    if known.is_empty() {
        return Err(Error::PrecisionExhausted("every coefficient is indeterminate".into()));
    }
    let (lo, hi) = (known[0].0, known[known.len() - 1].0);
    let mut hull: Vec<(usize, Rational)> = Vec::new();
    for pt in known {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &pt) <= Rational::zero() {
            hull.pop();
        }
        hull.push(pt);
    }
    // an indeterminate coefficient must lie on or above the hull to be harmless
    for (k, v) in bounds {
        let ok = k > lo
            && k < hi
            && hull.windows(2).any(|w| {
                let (a, b) = (&w[0], &w[1]);
                a.0 <= k && k <= b.0 && {
                    let t = Rational::new(((k - a.0) as i64).into(), ((b.0 - a.0) as i64).into());
                    v >= &a.1 + (&b.1 - &a.1) * t
                }
            });
        if !ok {
            return Err(Error::PrecisionExhausted(format!("coefficient {k} is too imprecise to fix the Newton polygon")));
        }
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let len = w[1].0 - w[0].0;
            Segment { slope: (&w[1].1 - &w[0].1) / Rational::from_integer((len as i64).into()), length: len }
        })
        .collect();
    Ok(NewtonPolygon { segments, zero_multiplicity: lo })
}
