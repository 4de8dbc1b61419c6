//! Escape to infinity under a polynomial.

use berkdyn::berkline::BerkPoint;
use berkdyn::potential::image;
use berkdyn::ratmap::RationalMap;
use berkdyn::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Escape {
    /// First `n` with `|f^n(S)| > R`.
    Escaped(u32),
    Bounded(u32),
}

/// `log R0` such that every orbit entering `|z| > R0` tends to infinity.
///
/// Over `C`, `R0 = max(1, (1 + Σ_{i<d} |a_i|) / |a_d|)`. Otherwise
/// `|f(z)| = |a_d| |z|^d` beyond every `(|a_i|/|a_d|)^(1/(d-i))`, and that
/// exceeds `|z|` once `|z| > |a_d|^(-1/(d-1))`.
pub fn log_escape_radius(f: &RationalMap) -> Result<f64> {
    let poly = f.as_polynomial()?;
    let d = poly.degree().unwrap_or(0);
    if d < 2 {
        return Err(Error::InvalidArgument("escape needs a polynomial of degree at least 2".into()));
    }
    let lead = poly.coeff(d).log_abs()?.to_f64();
    if f.backend().is_archimedean() {
        let rest: f64 = poly.terms().filter(|(k, _)| *k < d).map(|(_, c)| c.abs().unwrap_or(f64::NAN)).sum();
        return Ok(((1.0 + rest).ln() - lead).max(0.0));
    }
    let mut r = (-lead / (d - 1) as f64).max(0.0);
    for (k, c) in poly.terms().filter(|(k, _)| *k < d) {
        r = r.max((c.log_abs()?.to_f64() - lead) / (d - k) as f64);
    }
    Ok(r)
}

fn log_abs(s: &BerkPoint) -> Result<f64> {
    match s {
        BerkPoint::Classical(z) if z.is_infinity() => Ok(f64::INFINITY),
        BerkPoint::Classical(z) if z.backend().is_archimedean() => Ok(z.affine_value().unwrap().abs()?.ln()),
        _ => Ok(s.log_abs()?.to_f64()),
    }
}

/// Iterates `S, f(S), f²(S), ...` until `|f^n(S)| > radius` or `max_iter` steps.
pub fn escape_test(f: &RationalMap, s: &BerkPoint, max_iter: u32, radius: f64) -> Result<Escape> {
    let log_r = radius.ln();
    let r0 = log_escape_radius(f)?;
    if !(log_r > r0) {
        return Err(Error::InvalidArgument(format!("radius {radius} does not exceed the escape radius {}", r0.exp())));
    }
    let mut cur = s.clone();
    for n in 0..=max_iter {
        if log_abs(&cur)? > log_r {
            return Ok(Escape::Escaped(n));
        }
        if n < max_iter {
            cur = image(f, &cur)?;
        }
    }
    Ok(Escape::Bounded(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use berkdyn::scalar::{Backend, Rational};

    #[test]
    fn examples() {
        let c = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let two = BerkPoint::parse(Backend::Complex, "2").unwrap();
        assert_eq!(escape_test(&c, &two, 10, 2.0).unwrap(), Escape::Escaped(1));
        let half = BerkPoint::parse(Backend::Complex, "0.5").unwrap();
        assert_eq!(escape_test(&c, &half, 10, 2.0).unwrap(), Escape::Bounded(10));

        let q = Backend::padic(5, 10).unwrap();
        let f = RationalMap::parse(q, "z^2").unwrap();
        let s = BerkPoint::disk_vp(q.zero(), Rational::from_integer(1.into())).unwrap();
        assert_eq!(escape_test(&f, &s, 20, 1.5).unwrap(), Escape::Bounded(20));
        let big = BerkPoint::parse(q, "1/5").unwrap();
        assert_eq!(escape_test(&f, &big, 20, 1.5).unwrap(), Escape::Escaped(0));

        let l = Backend::laurent(2, 8).unwrap();
        let g = RationalMap::parse(l, "z+z^2").unwrap();
        assert_eq!(escape_test(&g, &BerkPoint::gauss(l).unwrap(), 12, 1.5).unwrap(), Escape::Bounded(12));
    }

    #[test]
    fn radius_must_exceed_escape_radius() {
        let c = RationalMap::parse(Backend::Complex, "z^2 - 3").unwrap();
        assert!((log_escape_radius(&c).unwrap() - 4f64.ln()).abs() < 1e-15);
        let p = BerkPoint::parse(Backend::Complex, "0").unwrap();
        assert!(escape_test(&c, &p, 5, 2.0).is_err());
        // 0 -> -3 -> 6 -> 33
        assert_eq!(escape_test(&c, &p, 5, 5.0).unwrap(), Escape::Escaped(2));
        let q = Backend::padic(5, 10).unwrap();
        let f = RationalMap::parse(q, "5*z^2").unwrap();
        assert!((log_escape_radius(&f).unwrap() - 5f64.ln()).abs() < 1e-12);
        assert!(RationalMap::parse(q, "1/z").map(|g| log_escape_radius(&g).is_err()).unwrap());
    }
}
