//! Rational maps through normalized homogeneous lifts.

use std::fmt;

use num_complex::Complex64;

use crate::berkline::{gauss_seminorm, BerkPoint};
use crate::error::{invalid, unsupported, Error, Result};
use crate::expr::{self, Algebra, ScalarAlgebra};
use crate::poly::Poly;
use crate::polyroots::{complex_roots, hensel_simple_roots};
use crate::projline::ProjectivePoint;
use crate::scalar::{Backend, LogReal, Scalar, Valuation};

/// Default cap on the degree of iterates.
pub const DEFAULT_DEGREE_BUDGET: u128 = 1 << 14;

/// Resultants are computed from the Sylvester matrix up to this degree;
/// compositions propagate them instead.
const SYLVESTER_MAX_DEGREE: usize = 256;

/// Complex coefficients this small relative to the largest are treated as zero
/// when counting vanishing orders.
const COMPLEX_ZERO_RELATIVE: f64 = 1e-8;

/// A binary form `sum c_k p0^(d-k) p1^k`, stored as the polynomial
/// `sum c_k z^k` together with its formal degree `d`.
#[derive(Clone, Debug)]
pub struct HomogeneousForm {
    degree: usize,
    poly: Poly,
}

/// Where a normalized point sits: `p = u * (1, z)` or `p = u * (w, 1)`.
enum Chart {
    Affine(Scalar),
    AtInfinity(Scalar),
}

/// Splits a normalized point into a chart and `log |u|`.
fn chart(p: &ProjectivePoint) -> (Chart, f64) {
    let (p0, p1) = p.coords();
    match (p0, p1) {
        (Scalar::Complex(a), Scalar::Complex(b)) => {
            if a.norm() >= b.norm() {
                (Chart::Affine(Scalar::Complex(b / a)), a.norm().ln())
            } else {
                (Chart::AtInfinity(Scalar::Complex(a / b)), b.norm().ln())
            }
        }
        _ => {
            // non-archimedean points are stored with an exact unit coordinate
            if p0.exactly_equals(&p0.backend().one()) {
                (Chart::Affine(p1.clone()), 0.0)
            } else {
                (Chart::AtInfinity(p0.clone()), 0.0)
            }
        }
    }
}

impl HomogeneousForm {
    pub fn new(degree: usize, poly: Poly) -> Result<HomogeneousForm> {
        if poly.degree().is_some_and(|k| k > degree) {
            return invalid(format!("polynomial of degree {:?} does not fit a form of degree {degree}", poly.degree()));
        }
        Ok(HomogeneousForm { degree, poly })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The dehomogenization `F(1, z)`.
    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn coeff(&self, k: usize) -> Scalar {
        self.poly.coeff(k)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn mul(&self, other: &HomogeneousForm) -> HomogeneousForm {
        HomogeneousForm { degree: self.degree + other.degree, poly: self.poly.mul(&other.poly) }
    }

    pub fn sub(&self, other: &HomogeneousForm) -> HomogeneousForm {
        debug_assert_eq!(self.degree, other.degree);
        HomogeneousForm { degree: self.degree, poly: self.poly.sub(&other.poly) }
    }

    pub fn scale(&self, c: &Scalar) -> HomogeneousForm {
        HomogeneousForm { degree: self.degree, poly: self.poly.scale(c) }
    }

    fn eval_chart(&self, c: &Chart) -> Scalar {
        match c {
            Chart::Affine(z) => self.poly.eval(z),
            Chart::AtInfinity(w) => self.poly.eval_reversed(w, self.degree),
        }
    }

    /// `F(p)` at a normalized point (exact over non-archimedean fields).
    pub fn eval(&self, p: &ProjectivePoint) -> Scalar {
        let (c, logu) = chart(p);
        let v = self.eval_chart(&c);
        match v {
            Scalar::Complex(x) => Scalar::Complex(x * (logu * self.degree as f64).exp()),
            other => other,
        }
    }

    /// Multiplicity of `z` as a root of the form, with complex coefficients
    /// below `1e-8` of the largest counted as zero.
    pub fn vanishing_order(&self, z: &ProjectivePoint) -> usize {
        let nonzero = self.nonzero_predicate();
        match z.affine_value() {
            None => {
                let top = self.poly.terms().filter(|(_, c)| nonzero(c)).map(|(k, _)| k).max();
                self.degree - top.unwrap_or(0)
            }
            Some(a) => {
                let shifted = self.poly.taylor_shift(&a);
                shifted.terms().find(|(_, c)| nonzero(c)).map_or(self.degree, |(k, _)| k)
            }
        }
    }

    fn nonzero_predicate(&self) -> impl Fn(&Scalar) -> bool {
        let scale = match self.poly.backend() {
            Backend::Complex => {
                self.poly.terms().map(|(_, c)| c.as_complex().unwrap().norm()).fold(0.0, f64::max)
            }
            _ => 0.0,
        };
        move |c: &Scalar| match c {
            Scalar::Complex(x) => x.norm() > COMPLEX_ZERO_RELATIVE * scale,
            other => !other.is_zero() && !other.is_indeterminate(),
        }
    }

    /// Projective roots with multiplicity. The flag is false when some roots
    /// could not be found (non-archimedean roots outside the base field, or
    /// complex non-convergence).
    pub fn roots(&self) -> Result<(Vec<(ProjectivePoint, usize)>, bool)> {
        let b = self.poly.backend();
        if self.is_zero() {
            return invalid("the zero form has no root set");
        }
        if b.is_archimedean() {
            let c = self.poly.complex_coeffs().unwrap();
            let rl = complex_roots(&c, self.degree)?;
            let complete = rl.converged && rl.total_multiplicity() == self.degree;
            return Ok((rl.roots.into_iter().map(|r| (r.point, r.multiplicity)).collect(), complete));
        }
        let mut out = Vec::new();
        let inf = ProjectivePoint::infinity(b);
        let zero = ProjectivePoint::affine(b.zero());
        let m_inf = self.vanishing_order(&inf);
        let m_zero = self.vanishing_order(&zero);
        if m_inf > 0 {
            out.push((inf, m_inf));
        }
        if m_zero > 0 {
            out.push((zero, m_zero));
        }
        let lo = m_zero;
        let hi = self.degree - m_inf;
        let mut found = m_inf + m_zero;
        if hi > lo {
            // |z| <= 1, z != 0
            let core = Poly::from_terms(b, self.poly.terms().filter(|(k, _)| *k >= lo && *k <= hi).map(|(k, c)| (k - lo, c.clone())).collect());
            let h = hensel_simple_roots(&core)?;
            for r in h.roots {
                if !r.is_indeterminate() && !r.is_zero() {
                    out.push((ProjectivePoint::affine(r), 1));
                    found += 1;
                }
            }
            // repeated roots are only caught when a residue lift is exact
            let p = b.prime().unwrap();
            for a in 1..p.min(64) {
                let x = b.from_i64(a as i64);
                let px = ProjectivePoint::affine(x.clone());
                // a simple residue root has exactly one lift, already found
                if out.iter().any(|(q, _)| q.wedge(&px).is_ok_and(|w| w.log_abs_upper().to_f64() < 0.0)) {
                    continue;
                }
                if core.eval(&x).is_zero() {
                    let m = self.vanishing_order(&px);
                    out.push((px, m));
                    found += m;
                }
            }
            // |z| > 1 through w = 1/z with |w| < 1
            let rev = Poly::from_terms(b, core.terms().map(|(k, c)| (hi - lo - k, c.clone())).collect());
            let h = hensel_simple_roots(&rev)?;
            for w in h.roots {
                if matches!(w.valuation()?, Valuation::Finite(v) if v > 0) {
                    out.push((ProjectivePoint::new(w, b.one())?, 1));
                    found += 1;
                }
            }
        }
        Ok((out, found == self.degree))
    }
}

/// Log of `|det|` of a square matrix, by elimination with largest-pivot choice.
/// `None` when a pivot is indeterminate.
fn log_abs_det(mut m: Vec<Vec<Scalar>>) -> Result<Option<LogReal>> {
    let n = m.len();
    let mut acc: Option<LogReal> = None;
    for col in 0..n {
        let mut best: Option<(usize, LogReal)> = None;
        let mut lost = false;
        for (r, row) in m.iter().enumerate().skip(col) {
            let x = &row[col];
            if x.is_zero() {
                continue;
            }
            if x.is_indeterminate() {
                lost = true;
                continue;
            }
            let l = x.log_abs()?;
            if best.as_ref().is_none_or(|(_, b)| l > *b) {
                best = Some((r, l));
            }
        }
        let Some((r, l)) = best else {
            return Ok(if lost { None } else { Some(LogReal::NegInf) });
        };
        m.swap(col, r);
        let piv = m[col][col].clone();
        let inv = piv.inv()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] * &inv;
            for c in col..n {
                if !m[col][c].is_zero() {
                    let t = &f * &m[col][c];
                    m[r][c] = &m[r][c] - &t;
                }
            }
        }
        acc = Some(match acc {
            None => l,
            Some(a) => a.add(&l),
        });
    }
    Ok(Some(acc.unwrap_or(LogReal::Real(0.0))))
}

/// `log |Res(F0, F1)|` from the Sylvester matrix of the two forms.
pub fn log_abs_resultant(f0: &HomogeneousForm, f1: &HomogeneousForm) -> Result<Option<LogReal>> {
    let d = f0.degree;
    if d != f1.degree || d == 0 {
        return invalid("resultant needs two forms of the same positive degree");
    }
    let b = f0.poly.backend();
    let exact = d <= 8;
    let prep = |c: Scalar| if exact { c } else { c.to_approx() };
    let (a, c) = (f0.poly.to_dense(), f1.poly.to_dense());
    let mut m = vec![vec![b.zero(); 2 * d]; 2 * d];
    for i in 0..d {
        for k in 0..=d {
            if let Some(x) = a.get(k) {
                m[i][i + k] = prep(x.clone());
            }
            if let Some(x) = c.get(k) {
                m[d + i][i + k] = prep(x.clone());
            }
        }
    }
    log_abs_det(m)
}

#[derive(Clone, Debug)]
pub struct RationalMap {
    f0: HomogeneousForm,
    f1: HomogeneousForm,
    /// `log |c|` where the natural lift equals `c` times the stored lift.
    log_scale: LogReal,
    /// `log |Res|` of the stored lift, when known.
    log_res: Option<LogReal>,
    label: Option<String>,
}

/// Divides both forms by a coefficient of maximal absolute value (a power of
/// the uniformizer, or a positive real). Returns the forms and `log |c|`.
fn normalize(f0: HomogeneousForm, f1: HomogeneousForm) -> Result<(HomogeneousForm, HomogeneousForm, LogReal)> {
    let b = f0.poly.backend();
    let m0 = f0.poly.max_abs_coeff()?;
    let m1 = f1.poly.max_abs_coeff()?;
    let top = match (m0, m1) {
        (None, None) => {
            return if f0.is_zero() && f1.is_zero() {
                invalid("both lift components vanish")
            } else {
                Err(Error::PrecisionExhausted("every lift coefficient is indeterminate".into()))
            }
        }
        (Some(x), None) | (None, Some(x)) => x,
        (Some(x), Some(y)) => {
            if y.log_abs()? > x.log_abs()? {
                y
            } else {
                x
            }
        }
    };
    let c = match b {
        Backend::Complex => Scalar::Complex(Complex64::new(top.abs()?, 0.0)),
        _ => match top.valuation()? {
            Valuation::Finite(v) => b.uniformizer_pow(v)?,
            _ => unreachable!(),
        },
    };
    let lc = c.log_abs()?;
    if b.is_archimedean() && lc.to_f64() == 0.0 {
        return Ok((f0, f1, LogReal::Real(0.0)));
    }
    let inv = c.inv()?;
    Ok((f0.scale(&inv), f1.scale(&inv), lc))
}

fn zero_log(b: Backend) -> LogReal {
    match b.prime() {
        Some(p) => LogReal::zero_val(p),
        None => LogReal::Real(0.0),
    }
}

impl RationalMap {
    /// Map with lift `(F0, F1)`, i.e. `z -> F1(1, z) / F0(1, z)`.
    pub fn from_forms(f0: HomogeneousForm, f1: HomogeneousForm) -> Result<RationalMap> {
        if f0.degree != f1.degree {
            return invalid("lift components must have equal degree");
        }
        let b = f0.poly.backend();
        if f1.poly.backend() != b {
            return Err(Error::BackendMismatch(b.to_string(), f1.poly.backend().to_string()));
        }
        let (f0, f1, log_scale) = normalize(f0, f1)?;
        let d = f0.degree;
        let log_res = if d > 0 && d <= SYLVESTER_MAX_DEGREE {
            let r = log_abs_resultant(&f0, &f1)?;
            if r.as_ref().is_some_and(|r| r.is_neg_inf()) {
                return invalid("lift components share a root (resultant vanishes)");
            }
            r
        } else {
            None
        };
        Ok(RationalMap { f0, f1, log_scale, log_res, label: None })
    }

    /// `z -> num(z) / den(z)`.
    pub fn from_polys(num: Poly, den: Poly) -> Result<RationalMap> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        RationalMap::from_forms(HomogeneousForm::new(d, den)?, HomogeneousForm::new(d, num)?)
    }

    /// Coefficient lists `c_k` of `z^k` for numerator and denominator.
    pub fn from_coefficients(num: Vec<Scalar>, den: Vec<Scalar>) -> Result<RationalMap> {
        let b = num.first().or(den.first()).map(|c| c.backend()).ok_or_else(|| Error::InvalidArgument("empty coefficient list".into()))?;
        for c in num.iter().chain(&den) {
            b.check(c)?;
        }
        RationalMap::from_polys(Poly::from_coeffs(b, num), Poly::from_coeffs(b, den))
    }

    pub fn identity(b: Backend) -> RationalMap {
        RationalMap::from_polys(Poly::z(b), Poly::constant(b.one())).unwrap().with_label("z")
    }

    /// The constant map with value `c` (degree 0).
    pub fn constant(c: &ProjectivePoint) -> RationalMap {
        let (c0, c1) = c.coords();
        let f0 = HomogeneousForm { degree: 0, poly: Poly::constant(c0.clone()) };
        let f1 = HomogeneousForm { degree: 0, poly: Poly::constant(c1.clone()) };
        let b = c.backend();
        RationalMap { f0, f1, log_scale: zero_log(b), log_res: None, label: Some(c.to_string()) }
    }

    /// Parses a map expression in `z`, e.g. `z^2-1`, `z+z^p`, `(z^2+1)/(2*z)`,
    /// `Id`, `inf`, or `coeffs:[c0,c1,...]/[d0,d1,...]`.
    pub fn parse(b: Backend, s: &str) -> Result<RationalMap> {
        let src = s.trim();
        let m = match src {
            "Id" | "id" | "identity" => RationalMap::identity(b),
            "inf" | "∞" => RationalMap::constant(&ProjectivePoint::infinity(b)),
            _ if src.starts_with("coeffs:") => {
                let body = &src["coeffs:".len()..];
                let (n, d) = body.split_once("]/[").ok_or_else(|| Error::Parse(format!("bad coefficient lists {s:?}")))?;
                let list = |t: &str| -> Result<Vec<Scalar>> {
                    t.trim_matches(|c| c == '[' || c == ']').split(',').map(|x| b.parse_scalar(x.trim())).collect()
                };
                RationalMap::from_coefficients(list(n)?, list(d)?)?
            }
            _ => {
                let rf = expr::parse(&MapAlgebra { scalars: ScalarAlgebra { backend: b } }, src)?;
                if rf.num.degree().unwrap_or(0) == 0 && rf.den.degree().unwrap_or(0) == 0 {
                    let v = rf.num.coeff(0).try_div(&rf.den.coeff(0))?;
                    RationalMap::constant(&ProjectivePoint::affine(v))
                } else {
                    RationalMap::from_polys(rf.num, rf.den)?
                }
            }
        };
        Ok(m.with_label(src))
    }

    pub fn with_label(mut self, label: &str) -> RationalMap {
        self.label = Some(label.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.to_string())
    }

    /// Same map, natural lift multiplied by `c`.
    pub fn with_lift_scale(&self, c: &Scalar) -> Result<RationalMap> {
        let mut m = self.clone();
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        m.log_scale = m.log_scale.add(&c.log_abs()?);
        Ok(m)
    }

    pub fn backend(&self) -> Backend {
        self.f0.poly.backend()
    }

    pub fn degree(&self) -> usize {
        self.f0.degree
    }

    pub fn lift(&self) -> (&HomogeneousForm, &HomogeneousForm) {
        (&self.f0, &self.f1)
    }

    pub fn log_scale(&self) -> &LogReal {
        &self.log_scale
    }

    pub fn log_resultant(&self) -> Option<&LogReal> {
        self.log_res.as_ref()
    }

    /// `F0 = c p0^d`: the map fixes infinity with no poles elsewhere.
    pub fn is_polynomial(&self) -> bool {
        self.f0.poly.degree() == Some(0)
    }

    /// `F(p)` at the normalized representative, as `(F0, F1, log|u|^d)` with
    /// `F(p) = u^d (F0, F1)`; the scale is 0 over non-archimedean fields.
    fn eval_parts(&self, z: &ProjectivePoint) -> Result<(Scalar, Scalar, f64)> {
        self.backend().check(z.coords().0)?;
        let (c, logu) = chart(z);
        Ok((self.f0.eval_chart(&c), self.f1.eval_chart(&c), logu * self.degree() as f64))
    }

    pub fn evaluate(&self, z: &ProjectivePoint) -> Result<ProjectivePoint> {
        let (a, b, _) = self.eval_parts(z)?;
        match (&a, &b) {
            (Scalar::Complex(x), Scalar::Complex(y)) => ProjectivePoint::from_complex_pair(*x, *y),
            _ => ProjectivePoint::new(a, b),
        }
    }

    /// `log ||F(p)||` for the normalized representative `p` of `z`
    /// (Euclidean norm over `C`, max norm otherwise).
    pub fn log_lift_norm(&self, z: &ProjectivePoint) -> Result<LogReal> {
        let (a, b, s) = self.eval_parts(z)?;
        if let (Scalar::Complex(x), Scalar::Complex(y)) = (&a, &b) {
            let m = x.norm().max(y.norm());
            if m == 0.0 {
                return Ok(LogReal::NegInf);
            }
            let n = m.ln() + 0.5 * ((x.norm() / m).powi(2) + (y.norm() / m).powi(2)).ln();
            return Ok(LogReal::Real(n + s));
        }
        let (ia, ib) = (a.is_indeterminate(), b.is_indeterminate());
        match (ia, ib) {
            (false, false) => Ok(a.log_abs()?.max(b.log_abs()?)),
            (true, true) => Err(Error::PrecisionExhausted("both lift components indeterminate".into())),
            (true, false) if b.log_abs()? > a.log_abs_upper() => b.log_abs(),
            (false, true) if a.log_abs()? > b.log_abs_upper() => a.log_abs(),
            _ => Err(Error::PrecisionExhausted("lift norm undetermined".into())),
        }
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &RationalMap) -> Result<RationalMap> {
        let b = self.backend();
        if g.backend() != b {
            return Err(Error::BackendMismatch(b.to_string(), g.backend().to_string()));
        }
        let (d, e) = (self.degree(), g.degree());
        let mut p0 = vec![Poly::constant(b.one())];
        let mut p1 = vec![Poly::constant(b.one())];
        for k in 1..=d {
            p0.push(p0[k - 1].mul(&g.f0.poly));
            p1.push(p1[k - 1].mul(&g.f1.poly));
        }
        let apply = |f: &HomogeneousForm| -> Poly {
            let mut acc = Poly::zero(b);
            for (k, c) in f.poly.terms() {
                acc = acc.add(&p0[d - k].mul(&p1[k]).scale(c));
            }
            acc
        };
        let h0 = HomogeneousForm { degree: d * e, poly: apply(&self.f0) };
        let h1 = HomogeneousForm { degree: d * e, poly: apply(&self.f1) };
        let (h0, h1, lc) = normalize(h0, h1)?;
        let log_scale = self.log_scale.add(&g.log_scale.scale_int(d as u64)).add(&lc);
        // Res(F∘G) = ±Res(F)^e Res(G)^(d^2); normalizing by c divides by c^(2de)
        let log_res = match (&self.log_res, &g.log_res) {
            (Some(rf), Some(rg)) if d > 0 && e > 0 => {
                let raw = rf.scale_int(e as u64).add(&rg.scale_int((d * d) as u64));
                Some(raw.sub(&lc.scale_int((2 * d * e) as u64)))
            }
            _ if d * e > 0 && d * e <= 16 => log_abs_resultant(&h0, &h1)?,
            _ => None,
        };
        let label = match (&self.label, &g.label) {
            (Some(a), Some(c)) => Some(format!("({a})∘({c})")),
            _ => None,
        };
        Ok(RationalMap { f0: h0, f1: h1, log_scale, log_res, label })
    }

    /// `f^n`, refusing when `d^n` exceeds `budget`.
    pub fn iterate(&self, n: u32, budget: u128) -> Result<RationalMap> {
        let d = self.degree() as u128;
        let deg = d.checked_pow(n).unwrap_or(u128::MAX);
        if deg > budget {
            return Err(Error::DegreeBudget { degree: deg, budget });
        }
        if n == 0 {
            return Ok(RationalMap::identity(self.backend()));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = self.compose(&acc)?;
        }
        acc.label = self.label.as_ref().map(|l| if n == 1 { l.clone() } else { format!("({l})^{n}") });
        Ok(acc)
    }

    /// `F0 G1 - F1 G0`, whose roots are the solutions of `f = g`.
    pub fn wedge_form(&self, g: &RationalMap) -> Result<HomogeneousForm> {
        if g.backend() != self.backend() {
            return Err(Error::BackendMismatch(self.backend().to_string(), g.backend().to_string()));
        }
        let w = self.f0.mul(&g.f1).sub(&self.f1.mul(&g.f0));
        match self.backend() {
            Backend::Complex => {
                let m = w.poly.terms().map(|(_, c)| c.as_complex().unwrap().norm()).fold(0.0, f64::max);
                if m <= 1e-13 {
                    return Err(Error::ZeroWedge);
                }
            }
            _ => {
                if w.is_zero() {
                    return Err(Error::ZeroWedge);
                }
                if w.poly.terms().all(|(_, c)| c.is_indeterminate()) {
                    return Err(Error::PrecisionExhausted("wedge form lost all digits".into()));
                }
            }
        }
        Ok(w)
    }

    /// Multiplicity of `z` as a solution of `f(·) = f(z)`.
    pub fn local_degree(&self, z: &ProjectivePoint) -> Result<usize> {
        if self.degree() == 0 {
            return invalid("local degree of a constant map");
        }
        let w = self.evaluate(z)?;
        let wedge = self.wedge_form(&RationalMap::constant(&w))?;
        Ok(wedge.vanishing_order(z).max(1))
    }

    /// Superattracting cycles of period 1 or 2 along which the local degree is `d`.
    pub fn exceptional_set(&self) -> Result<ExceptionalSet> {
        let d = self.degree();
        if d < 2 {
            return invalid("exceptional sets need degree >= 2");
        }
        let id = RationalMap::identity(self.backend());
        let close = |a: &ProjectivePoint, b: &ProjectivePoint| -> bool {
            match a.log_chordal(b) {
                Ok(l) => l.is_neg_inf() || (self.backend().is_archimedean() && l.to_f64() < -18.0),
                Err(_) => false,
            }
        };
        let mut points: Vec<(ProjectivePoint, u32)> = Vec::new();
        let mut complete = true;
        let mut period_one: Vec<ProjectivePoint> = Vec::new();
        for period in [1u32, 2] {
            let g = self.iterate(period, u128::MAX)?;
            let (cands, ok) = g.wedge_form(&id)?.roots()?;
            complete &= ok;
            for (z, _) in cands {
                if period == 1 {
                    period_one.push(z.clone());
                } else if period_one.iter().any(|q| close(q, &z)) {
                    continue;
                }
                if points.iter().any(|(q, _)| close(q, &z)) {
                    continue;
                }
                let fz = self.evaluate(&z)?;
                let ok = self.local_degree(&z)? == d && (period == 1 || self.local_degree(&fz)? == d);
                if ok {
                    points.push((z, period));
                    if period == 2 {
                        points.push((fz, period));
                    }
                }
            }
        }
        Ok(ExceptionalSet { points, complete })
    }

    /// Whether `z` lies in the exceptional set (complex points compared to 1e-8).
    pub fn is_exceptional(&self, z: &ProjectivePoint) -> Result<bool> {
        let e = self.exceptional_set()?;
        Ok(e.points.iter().any(|(q, _)| match q.log_chordal(z) {
            Ok(l) => l.is_neg_inf() || l.to_f64() < (1e-8f64).ln(),
            Err(_) => false,
        }))
    }

    /// The affine polynomial of a polynomial map.
    pub fn as_polynomial(&self) -> Result<Poly> {
        if !self.is_polynomial() {
            return unsupported("disk images of non-polynomial maps");
        }
        let c0 = self.f0.poly.coeff(0);
        Ok(self.f1.poly.scale(&c0.inv()?))
    }

    /// Image of a Berkovich point under a polynomial map.
    pub fn disk_image(&self, s: &BerkPoint) -> Result<BerkPoint> {
        match s {
            BerkPoint::Classical(z) => Ok(BerkPoint::Classical(self.evaluate(z)?)),
            BerkPoint::Disk { center, log_radius } => {
                let p = self.as_polynomial()?;
                let c = if center.log_abs_upper() <= *log_radius { self.backend().zero() } else { center.clone() };
                let q = p.taylor_shift(&c);
                let image_center = q.coeff(0);
                let tail = q.sub(&Poly::constant(image_center.clone()));
                let r = gauss_seminorm(&tail, &self.backend().zero(), log_radius)?;
                BerkPoint::disk(image_center, r)
            }
        }
    }

    /// Unit resultant of the normalized lift.
    pub fn good_reduction(&self) -> Result<bool> {
        let Some(p) = self.backend().prime() else {
            return unsupported("good reduction over C");
        };
        if self.degree() == 0 {
            return invalid("good reduction of a constant map");
        }
        let r = match &self.log_res {
            Some(r) => r.clone(),
            None => log_abs_resultant(&self.f0, &self.f1)?
                .ok_or_else(|| Error::PrecisionExhausted("resultant lost all digits".into()))?,
        };
        Ok(r == LogReal::zero_val(p))
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |p: &Poly| p.to_dense().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "coeffs:[{}]/[{}]", list(&self.f1.poly), list(&self.f0.poly))
    }
}

#[derive(Clone, Debug)]
pub struct ExceptionalSet {
    /// Exceptional points with the period of their cycle.
    pub points: Vec<(ProjectivePoint, u32)>,
    /// False when some fixed-point candidates were not found in the base field.
    pub complete: bool,
}

/// Rational functions `num/den` for parsing map expressions.
#[derive(Clone)]
struct RatFn {
    num: Poly,
    den: Poly,
}

struct MapAlgebra {
    scalars: ScalarAlgebra,
}

impl MapAlgebra {
    fn konst(&self, c: Scalar) -> RatFn {
        RatFn { num: Poly::constant(c), den: Poly::constant(self.scalars.backend.one()) }
    }

    fn den_is_one(&self, r: &RatFn) -> bool {
        r.den.degree() == Some(0) && r.den.coeff(0).exactly_equals(&self.scalars.backend.one())
    }
}

impl Algebra for MapAlgebra {
    type V = RatFn;
    fn number(&self, lit: &str) -> Result<RatFn> {
        Ok(self.konst(self.scalars.scalar_number(lit)?))
    }
    fn ident(&self, name: &str) -> Result<RatFn> {
        if name == "z" {
            let b = self.scalars.backend;
            return Ok(RatFn { num: Poly::z(b), den: Poly::constant(b.one()) });
        }
        Ok(self.konst(self.scalars.scalar_ident(name)?))
    }
    fn int_ident(&self, name: &str) -> Option<i64> {
        match name {
            "p" => self.scalars.backend.prime().map(i64::from),
            _ => None,
        }
    }
    fn big_o(&self, arg: RatFn) -> Result<RatFn> {
        if arg.num.degree().unwrap_or(0) > 0 || !self.den_is_one(&arg) {
            return Err(Error::Parse("O(...) must wrap a constant".into()));
        }
        Ok(self.konst(self.scalars.scalar_big_o(arg.num.coeff(0))?))
    }
    fn add(&self, a: RatFn, b: RatFn) -> Result<RatFn> {
        if self.den_is_one(&a) && self.den_is_one(&b) {
            return Ok(RatFn { num: a.num.add(&b.num), den: a.den });
        }
        Ok(RatFn { num: a.num.mul(&b.den).add(&b.num.mul(&a.den)), den: a.den.mul(&b.den) })
    }
    fn sub(&self, a: RatFn, b: RatFn) -> Result<RatFn> {
        let nb = self.neg(b)?;
        self.add(a, nb)
    }
    fn mul(&self, a: RatFn, b: RatFn) -> Result<RatFn> {
        let den = if self.den_is_one(&a) { b.den.clone() } else if self.den_is_one(&b) { a.den.clone() } else { a.den.mul(&b.den) };
        Ok(RatFn { num: a.num.mul(&b.num), den })
    }
    fn div(&self, a: RatFn, b: RatFn) -> Result<RatFn> {
        if b.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.mul(a, RatFn { num: b.den, den: b.num })
    }
    fn neg(&self, a: RatFn) -> Result<RatFn> {
        Ok(RatFn { num: a.num.neg(), den: a.den })
    }
    fn pow(&self, a: RatFn, k: i64) -> Result<RatFn> {
        let r = RatFn { num: a.num.pow(k.unsigned_abs()), den: a.den.pow(k.unsigned_abs()) };
        if k < 0 {
            if r.num.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Ok(RatFn { num: r.den, den: r.num })
        } else {
            Ok(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn l2() -> Backend {
        Backend::laurent(2, 16).unwrap()
    }

    fn c(re: f64, im: f64) -> ProjectivePoint {
        ProjectivePoint::complex(Complex64::new(re, im))
    }

    #[test]
    fn evaluate_examples() {
        let b = Backend::Complex;
        let f = RationalMap::parse(b, "z^2").unwrap();
        assert!(f.evaluate(&ProjectivePoint::infinity(b)).unwrap().is_infinity());
        let w = f.evaluate(&c(1.0, 1.0)).unwrap().affine_value().unwrap().as_complex().unwrap();
        assert!((w - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        let lb = l2();
        let g = RationalMap::parse(lb, "z+z^p").unwrap();
        let t = lb.uniformizer().unwrap();
        let v = g.evaluate(&ProjectivePoint::affine(t.clone())).unwrap().affine_value().unwrap();
        assert!(v.exactly_equals(&lb.parse_scalar("t + t^2").unwrap()));
    }

    #[test]
    fn iterate_examples() {
        for (p, j) in [(2u32, 2u32), (3, 1)] {
            let b = Backend::laurent(p, 8).unwrap();
            let f = RationalMap::parse(b, "z+z^p").unwrap();
            let n = p.pow(j);
            let g = f.iterate(n, DEFAULT_DEGREE_BUDGET).unwrap();
            let big = (p as usize).pow(n);
            let (f0, f1) = g.lift();
            assert_eq!(f1.poly().nnz(), 2);
            assert!(f1.coeff(1).exactly_equals(&b.one()) && f1.coeff(big).exactly_equals(&b.one()));
            assert!(f0.poly().degree() == Some(0) && f0.coeff(0).exactly_equals(&b.one()));
        }
        let b = Backend::padic(5, 8).unwrap();
        let f = RationalMap::parse(b, "z^2").unwrap().iterate(3, 1 << 14).unwrap();
        assert_eq!(f.lift().1.poly().degree(), Some(8));
        assert_eq!(f.lift().1.poly().nnz(), 1);
        let g = RationalMap::parse(Backend::Complex, "z^2-1").unwrap().iterate(2, 1 << 14).unwrap();
        let want = [0.0, 0.0, -2.0, 0.0, 1.0];
        for (k, w) in want.iter().enumerate() {
            let got = g.lift().1.coeff(k).as_complex().unwrap().re / g.lift().0.coeff(0).as_complex().unwrap().re;
            assert!((got - w).abs() < 1e-14);
        }
        assert!(matches!(
            RationalMap::parse(b, "z^2").unwrap().iterate(15, 1 << 14),
            Err(Error::DegreeBudget { .. })
        ));
    }

    #[test]
    fn wedge_examples() {
        let b = Backend::padic(5, 8).unwrap();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        let w = f.wedge_form(&one).unwrap();
        assert_eq!(w.degree(), 2);
        let (roots, complete) = w.roots().unwrap();
        assert!(complete);
        assert_eq!(roots.len(), 2);
        let id = RationalMap::identity(b);
        let w = f.wedge_form(&id).unwrap();
        let (roots, complete) = w.roots().unwrap();
        assert!(complete && roots.len() == 3);
        let lb = l2();
        let g = RationalMap::parse(lb, "z+z^p").unwrap();
        let w = g.wedge_form(&RationalMap::identity(lb)).unwrap();
        assert_eq!(w.degree(), 3);
        assert_eq!(w.poly().nnz(), 1);
        assert_eq!(w.vanishing_order(&ProjectivePoint::infinity(lb)), 1);
        assert_eq!(w.vanishing_order(&ProjectivePoint::affine(lb.zero())), 2);
        assert!(matches!(f.wedge_form(&f), Err(Error::ZeroWedge)));
    }

    #[test]
    fn local_degree_examples() {
        let b = Backend::Complex;
        let f = RationalMap::parse(b, "z^2").unwrap();
        assert_eq!(f.local_degree(&c(0.0, 0.0)).unwrap(), 2);
        assert_eq!(f.local_degree(&c(1.0, 0.0)).unwrap(), 1);
        assert_eq!(f.local_degree(&ProjectivePoint::infinity(b)).unwrap(), 2);
        let lb = l2();
        let g = RationalMap::parse(lb, "z+z^p").unwrap();
        assert_eq!(g.local_degree(&ProjectivePoint::affine(lb.zero())).unwrap(), 1);
        assert_eq!(g.local_degree(&ProjectivePoint::infinity(lb)).unwrap(), 2);
    }

    #[test]
    fn exceptional_examples() {
        let f = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let e = f.exceptional_set().unwrap();
        assert_eq!(e.points.len(), 2);
        let f = RationalMap::parse(Backend::Complex, "z^2-1").unwrap();
        let e = f.exceptional_set().unwrap();
        assert_eq!(e.points.len(), 1);
        assert!(e.points[0].0.is_infinity());
        for p in [2u32, 3] {
            let b = Backend::laurent(p, 8).unwrap();
            let e = RationalMap::parse(b, "z+z^p").unwrap().exceptional_set().unwrap();
            assert!(e.complete);
            assert_eq!(e.points.len(), 1);
            assert!(e.points[0].0.is_infinity());
        }
        let b = Backend::padic(5, 8).unwrap();
        let e = RationalMap::parse(b, "z^2").unwrap().exceptional_set().unwrap();
        assert_eq!(e.points.len(), 2);
        // a period-two exceptional cycle: 1/z^2 swaps 0 and infinity
        let e = RationalMap::parse(Backend::Complex, "1/z^2").unwrap().exceptional_set().unwrap();
        assert_eq!(e.points.len(), 2);
        assert!(e.points.iter().all(|(_, per)| *per == 2));
    }

    #[test]
    fn disk_image_examples() {
        let b = Backend::padic(5, 8).unwrap();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let g = BerkPoint::gauss(b).unwrap();
        assert!(f.disk_image(&g).unwrap().same_point(&g).unwrap());
        let s = BerkPoint::disk_vp(b.zero(), Rational::from_integer(1.into())).unwrap();
        let want = BerkPoint::disk_vp(b.zero(), Rational::from_integer(2.into())).unwrap();
        assert!(f.disk_image(&s).unwrap().same_point(&want).unwrap());
        let lb = l2();
        let h = RationalMap::parse(lb, "z+z^p").unwrap();
        let s = BerkPoint::disk_vp(lb.zero(), Rational::from_integer(3.into())).unwrap();
        assert!(h.disk_image(&s).unwrap().same_point(&s).unwrap());
        let r = RationalMap::parse(b, "1/z").unwrap();
        assert!(matches!(r.disk_image(&g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn good_reduction_examples() {
        let b = Backend::padic(5, 8).unwrap();
        assert!(RationalMap::parse(b, "z^2").unwrap().good_reduction().unwrap());
        assert!(RationalMap::parse(l2(), "z+z^p").unwrap().good_reduction().unwrap());
        assert!(!RationalMap::parse(b, "z^2/5").unwrap().good_reduction().unwrap());
        assert!(!RationalMap::parse(b, "z^2/p").unwrap().good_reduction().unwrap());
        // the propagated resultant of an iterate matches a direct determinant
        let f = RationalMap::parse(b, "(z^2+5)/(5*z+1)").unwrap();
        let f2 = f.compose(&f).unwrap();
        let (h0, h1) = f2.lift();
        assert_eq!(f2.log_resultant().unwrap(), &log_abs_resultant(h0, h1).unwrap().unwrap());
    }

    #[test]
    fn resultant_composition_formula_complex() {
        let f = RationalMap::parse(Backend::Complex, "(z^2+0.3)/(z-2)").unwrap();
        let g = RationalMap::parse(Backend::Complex, "(2*z^2-1)/(z^2+0.5*z+3)").unwrap();
        let h = f.compose(&g).unwrap();
        let (h0, h1) = h.lift();
        let direct = log_abs_resultant(h0, h1).unwrap().unwrap().to_f64();
        assert!((h.log_resultant().unwrap().to_f64() - direct).abs() < 1e-8);
    }

    #[test]
    fn normalization_records_scale() {
        let b = Backend::Complex;
        let f = RationalMap::parse(b, "4*z^2").unwrap();
        assert!((f.log_scale().to_f64() - 4f64.ln()).abs() < 1e-15);
        let q = Backend::padic(5, 8).unwrap();
        let g = RationalMap::parse(q, "z^2/25").unwrap();
        assert_eq!(g.log_scale(), &LogReal::from_int_valuation(0, 5));
        let h = RationalMap::parse(q, "(25*z^2+25)/(25*z)").unwrap();
        assert_eq!(h.log_scale(), &LogReal::from_int_valuation(2, 5));
    }

    #[test]
    fn common_root_rejected() {
        assert!(RationalMap::parse(Backend::padic(5, 8).unwrap(), "(z^2-1)/(z-1)").is_err());
    }

    fn arb_padic_point() -> impl Strategy<Value = ProjectivePoint> {
        (-2i64..3, -30i64..30).prop_map(|(v, u)| {
            let b = Backend::padic(5, 20).unwrap();
            ProjectivePoint::affine(b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn iterate_is_repeated_evaluation(z in arb_padic_point(), n in 1u32..4) {
            let b = z.backend();
            let f = RationalMap::parse(b, "(z^2+5)/(z+1)").unwrap();
            let fnn = f.iterate(n, 1 << 14).unwrap();
            let mut w = z.clone();
            for _ in 0..n {
                w = f.evaluate(&w).unwrap();
            }
            prop_assert!(fnn.evaluate(&z).unwrap().log_chordal(&w).unwrap().is_neg_inf());
        }

        #[test]
        fn iterate_complex_consistency(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let f = RationalMap::parse(Backend::Complex, "z^2-0.5+0.3i").unwrap();
            let z = c(re, im);
            let g = f.iterate(3, 1 << 14).unwrap();
            let mut w = z.clone();
            for _ in 0..3 {
                w = f.evaluate(&w).unwrap();
            }
            prop_assert!(g.evaluate(&z).unwrap().chordal(&w).unwrap() < 1e-9);
        }

        #[test]
        fn iterate_splits_as_composition(m in 1u32..3, n in 1u32..3) {
            let b = Backend::padic(3, 10).unwrap();
            let f = RationalMap::parse(b, "(z^2+3)/(3*z+1)").unwrap();
            let whole = f.iterate(m + n, 1 << 14).unwrap();
            let split = f.iterate(m, 1 << 14).unwrap().compose(&f.iterate(n, 1 << 14).unwrap()).unwrap();
            let (a0, a1) = whole.lift();
            let (b0, b1) = split.lift();
            for k in 0..=whole.degree() {
                prop_assert!(a0.coeff(k).exactly_equals(&b0.coeff(k)));
                prop_assert!(a1.coeff(k).exactly_equals(&b1.coeff(k)));
            }
            prop_assert_eq!(whole.log_scale(), split.log_scale());
        }

        #[test]
        fn wedge_degree_and_root_count(a in 1i64..20, bb in 1i64..20) {
            let b = Backend::Complex;
            let f = RationalMap::parse(b, &format!("(z^3+{a})/(z-{bb})")).unwrap();
            let g = RationalMap::parse(b, "z^2+0.5").unwrap();
            let w = f.wedge_form(&g).unwrap();
            prop_assert_eq!(w.degree(), 5);
            let (roots, _) = w.roots().unwrap();
            prop_assert_eq!(roots.iter().map(|r| r.1).sum::<usize>(), 5);
        }

        #[test]
        fn disk_image_contains_images(u in 0i64..125, k in 0i64..25, r in 1i64..3) {
            let b = Backend::padic(5, 20).unwrap();
            let f = RationalMap::parse(b, "z^3+5*z+7").unwrap();
            let center = b.from_i64(u);
            let s = BerkPoint::disk_vp(center.clone(), Rational::from_integer(r.into())).unwrap();
            let img = f.disk_image(&s).unwrap();
            let z = center.try_add(&b.uniformizer_pow(r).unwrap().try_mul(&b.from_i64(k)).unwrap()).unwrap();
            let fz = BerkPoint::Classical(f.evaluate(&ProjectivePoint::affine(z)).unwrap());
            prop_assert!(fz.join(&img).unwrap().same_point(&img).unwrap());
        }
    }
}
