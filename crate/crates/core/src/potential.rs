//! Dynamical Green functions, F-kernels, potentials, energies and the
//! proximity function `[f(·), a(·)]_can`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::berkline::{seminorm_at, BerkPoint};
use crate::equidist::DiscreteMeasure;
use crate::error::{invalid, unsupported, Error, Result};
use crate::polyroots::complex_roots;
use crate::projline::ProjectivePoint;
use crate::ratmap::{HomogeneousForm, RationalMap};
use crate::scalar::{Backend, LogReal, Rational};

/// Truncation of the Green series and the certified bound on the dropped tail.
#[derive(Clone, Copy, Debug)]
pub struct GreenConfig {
    pub iterations: u32,
    pub tail_bound: f64,
}

/// A log-value with an error radius; `value` may be `-inf`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub value: LogReal,
    pub error: f64,
}

impl KernelValue {
    fn exact(value: LogReal) -> KernelValue {
        KernelValue { value, error: 0.0 }
    }

    pub fn is_neg_inf(&self) -> bool {
        self.value.is_neg_inf()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn zero_log(b: Backend) -> LogReal {
    match b.prime() {
        Some(p) => LogReal::zero_val(p),
        None => LogReal::Real(0.0),
    }
}

fn inv_power(d: usize, k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(d).pow(k))
}

/// `w * v`, avoiding rational conversions for floating values.
fn weighted(v: &LogReal, w: &Rational, wf: f64) -> LogReal {
    match v {
        LogReal::Real(x) => LogReal::Real(x * wf),
        _ => v.scale(w),
    }
}

fn require_dynamic(f: &RationalMap) -> Result<usize> {
    let d = f.degree();
    if d < 2 {
        return invalid("Green functions need degree >= 2");
    }
    Ok(d)
}

fn has_good_reduction(f: &RationalMap) -> bool {
    match (f.backend().prime(), f.log_resultant()) {
        (Some(p), Some(r)) => *r == LogReal::zero_val(p),
        _ => false,
    }
}

/// An upper bound for `sup |T_F|` over the line, for the stored lift.
pub fn sup_t_bound(f: &RationalMap) -> Result<f64> {
    let d = require_dynamic(f)? as f64;
    let lr = f
        .log_resultant()
        .ok_or_else(|| Error::Unsupported("tail bound without a resultant (degree above the Sylvester limit)".into()))?
        .to_f64();
    if !f.backend().is_archimedean() {
        return Ok(-lr);
    }
    // upper side: each component has at most d+1 unit-bounded terms;
    // lower side: resultant identity with Hadamard-type cofactor bounds
    let upper = (2f64.sqrt() * (d + 1.0)).ln();
    let lower = -lr + (2.0 * d).ln() + (2.0 * d - 1.0) / 2.0 * (d + 1.0).ln() + d / 2.0 * 2f64.ln();
    Ok(upper.max(lower))
}

impl GreenConfig {
    pub fn new(f: &RationalMap, iterations: u32) -> Result<GreenConfig> {
        if iterations == 0 {
            return invalid("Green series needs at least one term");
        }
        let d = require_dynamic(f)? as f64;
        let tail_bound = sup_t_bound(f)? / ((d - 1.0) * d.powi(iterations as i32));
        Ok(GreenConfig { iterations, tail_bound })
    }

    /// Fewest iterations whose tail bound is at most `tol` (capped at 1000).
    pub fn with_tolerance(f: &RationalMap, tol: f64) -> Result<GreenConfig> {
        let sup = sup_t_bound(f)?;
        let d = f.degree() as f64;
        let mut n = 1;
        while n < 1000 && sup / ((d - 1.0) * d.powi(n as i32)) > tol {
            n += 1;
        }
        GreenConfig::new(f, n)
    }
}

/// Image of a point: evaluation for classical points, disk images otherwise.
pub fn image(f: &RationalMap, s: &BerkPoint) -> Result<BerkPoint> {
    match s {
        BerkPoint::Classical(z) => Ok(BerkPoint::Classical(f.evaluate(z)?)),
        BerkPoint::Disk { .. } => f.disk_image(s),
    }
}

fn lift_seminorm(form: &HomogeneousForm, s: &BerkPoint) -> Result<LogReal> {
    seminorm_at(form.poly(), s)
}

/// `T_F(S) = log ||F(p)|| - d log ||p||`, extended to disks by Gauss seminorms.
pub fn t_f(f: &RationalMap, s: &BerkPoint) -> Result<LogReal> {
    match s {
        BerkPoint::Classical(z) => f.log_lift_norm(z),
        BerkPoint::Disk { .. } => {
            let (f0, f1) = f.lift();
            let n = lift_seminorm(f0, s)?.max(lift_seminorm(f1, s)?);
            let b = s.backend();
            let pos = s.log_abs()?.max(zero_log(b));
            Ok(n.sub(&pos.scale_int(f.degree() as u64)))
        }
    }
}

/// `g_F(S)` for the lift recorded in `f` (stored lift times its scale), with
/// the certified truncation error.
pub fn green(f: &RationalMap, s: &BerkPoint, cfg: &GreenConfig) -> Result<KernelValue> {
    let d = require_dynamic(f)?;
    f.backend().check(&s.backend().zero())?;
    let shift = f.log_scale().scale(&Rational::new(BigInt::one(), BigInt::from(d - 1)));
    if has_good_reduction(f) {
        // T_F vanishes identically
        return Ok(KernelValue::exact(shift));
    }
    let mut acc = zero_log(f.backend());
    let mut cur = s.clone();
    for k in 0..cfg.iterations {
        let t = t_f(f, &cur)?;
        acc = acc.add(&t.scale(&inv_power(d, k + 1)));
        if k + 1 < cfg.iterations {
            cur = image(f, &cur)?;
        }
    }
    Ok(KernelValue { value: acc.add(&shift), error: cfg.tail_bound })
}

/// `log [S, T]_can`; the chordal distance between classical points.
pub fn log_kernel(s: &BerkPoint, t: &BerkPoint) -> Result<LogReal> {
    match (s, t) {
        (BerkPoint::Classical(a), BerkPoint::Classical(b)) => a.log_chordal(b),
        _ => s.log_hsia(t),
    }
}

fn phi_from(k: LogReal, gs: &KernelValue, gt: &KernelValue) -> KernelValue {
    if k.is_neg_inf() {
        return KernelValue::exact(LogReal::NegInf);
    }
    KernelValue { value: k.sub(&gs.value.add(&gt.value)), error: gs.error + gt.error }
}

/// `Φ_F(S, T) = log [S, T]_can - g_F(S) - g_F(T)`.
pub fn phi_f(f: &RationalMap, s: &BerkPoint, t: &BerkPoint, cfg: &GreenConfig) -> Result<KernelValue> {
    let gs = green(f, s, cfg)?;
    let gt = green(f, t, cfg)?;
    Ok(phi_from(log_kernel(s, t)?, &gs, &gt))
}

struct Atom {
    point: BerkPoint,
    weight: Rational,
    wf: f64,
    green: KernelValue,
}

/// `U_{F,μ}` with the Green function of every atom computed once.
pub struct Potential<'a> {
    f: &'a RationalMap,
    cfg: GreenConfig,
    atoms: Vec<Atom>,
    mass: Rational,
}

impl<'a> Potential<'a> {
    pub fn new(f: &'a RationalMap, mu: &DiscreteMeasure, cfg: &GreenConfig) -> Result<Potential<'a>> {
        let atoms = mu
            .atoms()
            .par_iter()
            .map(|(s, w)| {
                Ok(Atom { point: s.clone(), weight: w.clone(), wf: w.to_f64().unwrap_or(f64::NAN), green: green(f, s, cfg)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Potential { f, cfg: *cfg, atoms, mass: mu.total_mass().clone() })
    }

    /// `U_{F,μ}(S)`; `-inf` when `S` is a classical atom.
    pub fn eval(&self, s: &BerkPoint) -> Result<KernelValue> {
        let gs = green(self.f, s, &self.cfg)?;
        let mut acc = zero_log(self.f.backend());
        let mut error = 0.0;
        for a in &self.atoms {
            let phi = phi_from(log_kernel(s, &a.point)?, &gs, &a.green);
            if phi.is_neg_inf() {
                return Ok(KernelValue::exact(LogReal::NegInf));
            }
            acc = acc.add(&weighted(&phi.value, &a.weight, a.wf));
            error += a.wf * phi.error;
        }
        Ok(KernelValue { value: acc, error })
    }

    /// The potential with `Φ_f = Φ_F - V_F`, i.e. `U_{F,μ}(S) - V_F μ(P¹)`.
    pub fn eval_canonical(&self, s: &BerkPoint, v_f: &LogReal) -> Result<KernelValue> {
        let u = self.eval(s)?;
        if u.is_neg_inf() {
            return Ok(u);
        }
        Ok(KernelValue { value: u.value.sub(&weighted(v_f, &self.mass, self.mass.to_f64().unwrap_or(f64::NAN))), error: u.error })
    }

    fn all_complex_classical(&self) -> Option<Vec<(Complex64, Complex64)>> {
        self.atoms
            .iter()
            .map(|a| match &a.point {
                BerkPoint::Classical(z) => Some((z.coords().0.as_complex()?, z.coords().1.as_complex()?)),
                _ => None,
            })
            .collect()
    }

    /// Leave-one-out potentials `U^(i)(x_i)`: the sum over the other atoms,
    /// plus the self-term for non-classical atoms.
    fn leave_one_out(&self) -> Result<Vec<KernelValue>> {
        let n = self.atoms.len();
        if let Some(coords) = self.all_complex_classical() {
            let g: Vec<f64> = self.atoms.iter().map(|a| a.green.value.to_f64()).collect();
            let rows: Vec<KernelValue> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let (p0, p1) = coords[i];
                    let mut acc = 0.0;
                    let mut error = 0.0;
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let (q0, q1) = coords[j];
                        let w = (p0 * q1 - p1 * q0).norm().min(1.0);
                        if w == 0.0 {
                            return KernelValue::exact(LogReal::NegInf);
                        }
                        acc += self.atoms[j].wf * (w.ln() - g[i] - g[j]);
                        error += self.atoms[j].wf * (self.atoms[i].green.error + self.atoms[j].green.error);
                    }
                    KernelValue { value: LogReal::Real(acc), error }
                })
                .collect();
            return Ok(rows);
        }
        (0..n)
            .into_par_iter()
            .map(|i| {
                let a = &self.atoms[i];
                let mut acc = zero_log(self.f.backend());
                let mut error = 0.0;
                for (j, b) in self.atoms.iter().enumerate() {
                    if j == i && a.point.is_classical() {
                        continue;
                    }
                    let phi = phi_from(log_kernel(&a.point, &b.point)?, &a.green, &b.green);
                    if phi.is_neg_inf() {
                        return Ok(KernelValue::exact(LogReal::NegInf));
                    }
                    acc = acc.add(&weighted(&phi.value, &b.weight, b.wf));
                    error += b.wf * phi.error;
                }
                Ok(KernelValue { value: acc, error })
            })
            .collect()
    }
}

/// `U_{F,μ}(S)`.
pub fn potential(f: &RationalMap, mu: &DiscreteMeasure, s: &BerkPoint, cfg: &GreenConfig) -> Result<KernelValue> {
    Potential::new(f, mu, cfg)?.eval(s)
}

/// Energy of a discrete measure with the leave-one-out potentials it was
/// summed from.
#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub energy: KernelValue,
    pub leave_one_out: Vec<KernelValue>,
}

/// `I_F(μ)` over off-diagonal pairs, plus diagonal terms of non-classical atoms.
pub fn energy(f: &RationalMap, mu: &DiscreteMeasure, cfg: &GreenConfig) -> Result<EnergyReport> {
    let pot = Potential::new(f, mu, cfg)?;
    let rows = pot.leave_one_out()?;
    let mut acc = zero_log(f.backend());
    let mut error = 0.0;
    for (a, r) in pot.atoms.iter().zip(&rows) {
        if r.is_neg_inf() {
            acc = LogReal::NegInf;
            break;
        }
        acc = acc.add(&weighted(&r.value, &a.weight, a.wf));
        error += a.wf * r.error;
    }
    Ok(EnergyReport { energy: KernelValue { value: acc, error }, leave_one_out: rows })
}

#[derive(Clone, Debug)]
pub struct VfEstimate {
    pub v_f: KernelValue,
    /// `sup_i |U^(i)(x_i) - I_F|` over the sample atoms.
    pub frostman_sup: f64,
}

/// `V_F` as the energy of a sample of `μ_f`, with the Frostman diagnostic.
pub fn v_f_estimate(f: &RationalMap, sample: &DiscreteMeasure, cfg: &GreenConfig) -> Result<VfEstimate> {
    let rep = energy(f, sample, cfg)?;
    let e = rep.energy.to_f64();
    let frostman_sup = rep.leave_one_out.iter().map(|r| (r.to_f64() - e).abs()).fold(0.0, f64::max);
    Ok(VfEstimate { v_f: rep.energy, frostman_sup })
}

/// `log [f(·), a(·)]_can` with the wedge form computed once.
pub struct Proximity<'a> {
    f: &'a RationalMap,
    a: &'a RationalMap,
    wedge: HomogeneousForm,
}

impl<'a> Proximity<'a> {
    pub fn new(f: &'a RationalMap, a: &'a RationalMap) -> Result<Proximity<'a>> {
        let wedge = f.wedge_form(a)?;
        Ok(Proximity { f, a, wedge })
    }

    pub fn wedge(&self) -> &HomogeneousForm {
        &self.wedge
    }

    /// Chordal distance of the images at classical points, the Gauss-seminorm
    /// route at disks.
    pub fn eval(&self, s: &BerkPoint) -> Result<LogReal> {
        match s {
            BerkPoint::Classical(z) => self.f.evaluate(z)?.log_chordal(&self.a.evaluate(z)?),
            BerkPoint::Disk { .. } => self.seminorm_route(s),
        }
    }

    /// `log |W(1,·)|_S - log ||F(1,·)||_S - log ||A(1,·)||_S`
    /// (non-archimedean; classical affine points evaluate directly).
    pub fn seminorm_route(&self, s: &BerkPoint) -> Result<LogReal> {
        if s.backend().is_archimedean() {
            return unsupported("the seminorm route over C");
        }
        let w = lift_seminorm(&self.wedge, s)?;
        if w.is_neg_inf() {
            return Ok(LogReal::NegInf);
        }
        let (f0, f1) = self.f.lift();
        let (a0, a1) = self.a.lift();
        let nf = lift_seminorm(f0, s)?.max(lift_seminorm(f1, s)?);
        let na = lift_seminorm(a0, s)?.max(lift_seminorm(a1, s)?);
        Ok(w.sub(&nf.add(&na)))
    }
}

/// `log [f(S), a(S)]_can` extended continuously to the Berkovich line.
pub fn proximity(f: &RationalMap, a: &RationalMap, s: &BerkPoint) -> Result<LogReal> {
    Proximity::new(f, a)?.eval(s)
}

/// The factored form of the proximity over `C`: with `W = c ∏ (· ∧ q_j)`,
/// `log |c| + Σ log |p ∧ q_j| - T_F(p) - T_A(p)`.
pub struct FactorRoute<'a> {
    f: &'a RationalMap,
    a: &'a RationalMap,
    log_c: f64,
    roots: Vec<(ProjectivePoint, usize)>,
}

impl<'a> FactorRoute<'a> {
    pub fn new(f: &'a RationalMap, a: &'a RationalMap) -> Result<FactorRoute<'a>> {
        if !f.backend().is_archimedean() {
            return unsupported("the factor route needs complex roots");
        }
        let w = f.wedge_form(a)?;
        let coeffs = w.poly().complex_coeffs().unwrap();
        let rl = complex_roots(&coeffs, w.degree())?;
        if !rl.converged {
            return Err(Error::NonConvergence { sweeps: rl.sweeps });
        }
        let top = w.poly().degree().unwrap();
        let mut log_c = coeffs[top].norm().ln();
        let mut roots = Vec::new();
        for r in rl.roots {
            if let Some(z) = r.point.affine_value() {
                log_c += r.multiplicity as f64 * 0.5 * z.as_complex().unwrap().norm_sqr().ln_1p();
            }
            roots.push((r.point, r.multiplicity));
        }
        Ok(FactorRoute { f, a, log_c, roots })
    }

    pub fn eval(&self, z: &ProjectivePoint) -> Result<LogReal> {
        let mut acc = self.log_c;
        for (q, m) in &self.roots {
            let l = z.log_chordal(q)?;
            if l.is_neg_inf() {
                return Ok(LogReal::NegInf);
            }
            acc += *m as f64 * l.to_f64();
        }
        let tf = self.f.log_lift_norm(z)?.to_f64();
        let ta = self.a.log_lift_norm(z)?.to_f64();
        Ok(LogReal::Real(acc - tf - ta))
    }
}

pub fn factor_route_proximity(f: &RationalMap, a: &RationalMap, z: &ProjectivePoint) -> Result<LogReal> {
    FactorRoute::new(f, a)?.eval(z)
}

/// The Hsia kernel of the two image disks: the naive, discontinuous composition.
pub fn naive_pointwise_proximity(f: &RationalMap, a: &RationalMap, s: &BerkPoint) -> Result<LogReal> {
    if s.backend().is_archimedean() {
        return unsupported("naive proximity over C");
    }
    log_kernel(&f.disk_image(s)?, &a.disk_image(s)?)
}

/// `log [f^n, a]_can(S) - g_f(f^n(S)) - g_f(a(S))` with `g_f = g_F + V_F/2`.
pub fn weighted_proximity(
    f: &RationalMap,
    a: &RationalMap,
    s: &BerkPoint,
    n: u32,
    cfg: &GreenConfig,
    v_f: &LogReal,
    budget: u128,
) -> Result<KernelValue> {
    let fnm = f.iterate(n, budget)?;
    let prox = proximity(&fnm, a, s)?;
    if prox.is_neg_inf() {
        return Ok(KernelValue::exact(LogReal::NegInf));
    }
    let g1 = green(f, &image(&fnm, s)?, cfg)?;
    let g2 = green(f, &image(a, s)?, cfg)?;
    Ok(KernelValue { value: prox.sub(&g1.value.add(&g2.value).add(v_f)), error: g1.error + g2.error })
}

/// `(1/d^n) log [f^n, a]_can(S)` for each `n`.
pub fn condition3_sequence(f: &RationalMap, a: &RationalMap, s: &BerkPoint, ns: &[u32], budget: u128) -> Result<Vec<LogReal>> {
    if s.backend().is_archimedean() || s.is_classical() {
        return invalid("condition (3) is evaluated at non-classical points of a non-archimedean line");
    }
    let d = f.degree();
    ns.iter()
        .map(|&n| {
            let fnm = f.iterate(n, budget)?;
            Ok(proximity(&fnm, a, s)?.scale(&inv_power(d, n)))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct ValironReport {
    /// `(1/d^n)` times the weighted mean of the finite proximities.
    pub value: LogReal,
    /// Atoms where `f^n = a` (proximity `-inf`), left out of the mean.
    pub excluded: usize,
}

/// `(1/d^n) ∫ log [f^n, a]_can dμ` over a sample of `μ_f`.
pub fn valiron_integral(f: &RationalMap, a: &RationalMap, mu: &DiscreteMeasure, n: u32, budget: u128) -> Result<ValironReport> {
    let fnm = f.iterate(n, budget)?;
    let prox = Proximity::new(&fnm, a)?;
    let vals = mu.atoms().par_iter().map(|(s, _)| prox.eval(s)).collect::<Result<Vec<_>>>()?;
    let mut acc = zero_log(f.backend());
    let mut wsum = Rational::zero();
    let mut excluded = 0;
    for ((_, w), v) in mu.atoms().iter().zip(&vals) {
        if v.is_neg_inf() {
            excluded += 1;
            continue;
        }
        acc = acc.add(&weighted(v, w, w.to_f64().unwrap_or(f64::NAN)));
        wsum += w;
    }
    if wsum.is_zero() {
        return Err(Error::AllAtomsInfinite);
    }
    let factor = inv_power(f.degree(), n) / wsum;
    let value = match acc {
        LogReal::Real(x) => LogReal::Real(x * factor.to_f64().unwrap_or(f64::NAN)),
        other => other.scale(&factor),
    };
    Ok(ValironReport { value, excluded })
}

/// Points of a complex measure as `BerkPoint`s, for convenience in tests and tools.
pub fn complex_point(z: Complex64) -> BerkPoint {
    BerkPoint::Classical(ProjectivePoint::complex(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmap::DEFAULT_DEGREE_BUDGET;
    use proptest::prelude::*;
    use crate::scalar::Scalar;
    use std::f64::consts::{LN_2, TAU};

    fn q5() -> Backend {
        Backend::padic(5, 12).unwrap()
    }

    fn vp(v: i64, p: u32) -> LogReal {
        LogReal::from_int_valuation(v, p)
    }

    fn roots_of_unity(n: usize) -> DiscreteMeasure {
        DiscreteMeasure::uniform((0..n).map(|k| complex_point(Complex64::from_polar(1.0, TAU * k as f64 / n as f64))).collect()).unwrap()
    }

    fn disk(b: Backend, c: i64, v: i64) -> BerkPoint {
        BerkPoint::disk_vp(b.from_i64(c), Rational::from_integer(v.into())).unwrap()
    }

    #[test]
    fn t_f_examples() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        for s in [BerkPoint::gauss(b).unwrap(), disk(b, 3, 2), disk(b, 0, -1), BerkPoint::classical(b.from_i64(7)), BerkPoint::infinity(b)] {
            assert_eq!(t_f(&f, &s).unwrap(), LogReal::zero_val(5));
        }
        let g = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        assert_eq!(t_f(&g, &complex_point(Complex64::new(0.0, 0.0))).unwrap().to_f64(), 0.0);
        let t = t_f(&g, &complex_point(Complex64::new(1.0, 0.0))).unwrap().to_f64();
        assert!((t + 0.5 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn green_good_reduction_is_exactly_zero() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let cfg = GreenConfig::new(&f, 5).unwrap();
        assert_eq!(cfg.tail_bound, 0.0);
        for s in [BerkPoint::gauss(b).unwrap(), disk(b, 2, 3), BerkPoint::classical(b.from_i64(10))] {
            let g = green(&f, &s, &cfg).unwrap();
            assert_eq!(g, KernelValue::exact(LogReal::zero_val(5)));
        }
    }

    #[test]
    fn green_on_unit_circle() {
        let f = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let cfg = GreenConfig::with_tolerance(&f, 1e-13).unwrap();
        for k in 0..7 {
            let z = complex_point(Complex64::from_polar(1.0, 0.3 + k as f64));
            let g = green(&f, &z, &cfg).unwrap();
            assert!((g.to_f64() + 0.5 * LN_2).abs() < 1e-12);
            assert!(g.error <= 1e-13);
        }
    }

    #[test]
    fn green_bad_reduction_is_exact_and_certified() {
        let b = q5();
        // lift (5 p0^2, p1^2): T_F(0) = -log 5 and 0 is fixed
        let f = RationalMap::parse(b, "z^2/5").unwrap();
        let cfg = GreenConfig::new(&f, 10).unwrap();
        let g = green(&f, &BerkPoint::classical(b.zero()), &cfg).unwrap();
        let want = LogReal::from_valuation(Rational::new(1023.into(), 1024.into()), 5);
        assert_eq!(g.value, want);
        assert!((g.to_f64() - (-(5f64.ln()))).abs() <= g.error);
    }

    #[test]
    fn green_scaling_law() {
        let f = RationalMap::parse(Backend::Complex, "z^2-1").unwrap();
        let cfg = GreenConfig::with_tolerance(&f, 1e-13).unwrap();
        let z = complex_point(Complex64::new(0.3, 0.8));
        let c = Scalar::Complex(Complex64::new(-2.0, 1.5));
        let g = green(&f, &z, &cfg).unwrap().to_f64();
        let gc = green(&f.with_lift_scale(&c).unwrap(), &z, &cfg).unwrap().to_f64();
        assert!((gc - g - c.abs().unwrap().ln()).abs() < 1e-13);
    }

    #[test]
    fn potential_of_roots_of_unity_closed_form() {
        // Φ_F(z, w) = log|z - w| - log⁺|z| - log⁺|w| for z², so
        // U(z) = (1/N) log|z^N - 1| - log⁺|z|
        let f = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let cfg = GreenConfig::with_tolerance(&f, 1e-14).unwrap();
        let n = 64;
        let mu = roots_of_unity(n);
        let pot = Potential::new(&f, &mu, &cfg).unwrap();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.2), Complex64::new(-1.3, 0.7), Complex64::new(3.0, -4.0)] {
            let want = (z.powu(n as u32) - 1.0).norm().ln() / n as f64 - z.norm().ln().max(0.0);
            let got = pot.eval(&complex_point(z)).unwrap();
            assert!((got.to_f64() - want).abs() < 1e-11 + got.error, "{z}: {} vs {want}", got.to_f64());
        }
        assert!(pot.eval(&complex_point(Complex64::new(1.0, 0.0))).unwrap().is_neg_inf());
    }

    #[test]
    fn single_atom_potential_is_phi() {
        let b = q5();
        let f = RationalMap::parse(b, "(z^2+5)/(5*z+1)").unwrap();
        let cfg = GreenConfig::new(&f, 6).unwrap();
        let s = disk(b, 1, 1);
        let t = BerkPoint::classical(b.from_i64(3));
        let mu = DiscreteMeasure::dirac(t.clone());
        assert_eq!(potential(&f, &mu, &s, &cfg).unwrap(), phi_f(&f, &s, &t, &cfg).unwrap());
    }

    #[test]
    fn gauss_energy_and_potential_vanish() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let cfg = GreenConfig::new(&f, 4).unwrap();
        let mu = DiscreteMeasure::dirac(BerkPoint::gauss(b).unwrap());
        let est = v_f_estimate(&f, &mu, &cfg).unwrap();
        assert_eq!(est.v_f, KernelValue::exact(LogReal::zero_val(5)));
        let pot = Potential::new(&f, &mu, &cfg).unwrap();
        for s in [disk(b, 7, 3), disk(b, 1, -2), BerkPoint::classical(b.from_i64(126)), BerkPoint::infinity(b)] {
            assert_eq!(pot.eval(&s).unwrap().value, LogReal::zero_val(5));
        }
    }

    #[test]
    fn circle_energy_matches_closed_form() {
        // Σ_{i≠j} log|ω_i - ω_j| / N² = log N / N
        let f = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let cfg = GreenConfig::with_tolerance(&f, 1e-14).unwrap();
        let n = 256;
        let est = v_f_estimate(&f, &roots_of_unity(n), &cfg).unwrap();
        assert!((est.v_f.to_f64() - (n as f64).ln() / n as f64).abs() < 1e-10);
        assert!(est.frostman_sup < 1e-10);
    }

    #[test]
    fn energy_is_weighted_mean_of_leave_one_out() {
        let f = RationalMap::parse(Backend::Complex, "z^2-1").unwrap();
        let cfg = GreenConfig::new(&f, 20).unwrap();
        let pts = [(0.3, 0.1), (-1.2, 0.4), (0.0, 2.0), (1.5, -0.5)];
        let w = [1, 2, 3, 4];
        let atoms = pts.iter().zip(w).map(|(&(x, y), k)| (complex_point(Complex64::new(x, y)), Rational::new(k.into(), 10.into()))).collect();
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let rep = energy(&f, &mu, &cfg).unwrap();
        let mean: f64 = rep.leave_one_out.iter().zip(mu.weights_f64()).map(|(r, w)| w * r.to_f64()).sum();
        assert!((mean - rep.energy.to_f64()).abs() < 1e-14);
    }

    #[test]
    fn proximity_examples() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap().iterate(4, DEFAULT_DEGREE_BUDGET).unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        assert_eq!(proximity(&f, &one, &BerkPoint::gauss(b).unwrap()).unwrap(), LogReal::zero_val(5));
        let z2 = RationalMap::parse(b, "z^2").unwrap();
        let id = RationalMap::identity(b);
        assert!(proximity(&z2, &id, &BerkPoint::classical(b.one())).unwrap().is_neg_inf());
        let l = Backend::laurent(2, 16).unwrap();
        let g = RationalMap::parse(l, "z+z^p").unwrap().iterate(2, DEFAULT_DEGREE_BUDGET).unwrap();
        let s = BerkPoint::disk_vp(l.zero(), Rational::from_integer(3.into())).unwrap();
        // p^(p^j) log r with r = |t|^3
        assert_eq!(proximity(&g, &RationalMap::identity(l), &s).unwrap(), vp(12, 2));
        assert!(matches!(proximity(&z2, &z2, &BerkPoint::gauss(b).unwrap()), Err(Error::ZeroWedge)));
    }

    #[test]
    fn remark_construction() {
        let b = q5();
        let s = disk(b, 0, 1);
        let id = RationalMap::identity(b);
        let g = RationalMap::parse(b, "z+z^2").unwrap();
        assert_eq!(naive_pointwise_proximity(&id, &g, &s).unwrap(), vp(1, 5));
        assert_eq!(proximity(&id, &g, &s).unwrap(), vp(2, 5));
        let h = RationalMap::parse(b, "z+1").unwrap();
        let gauss = BerkPoint::gauss(b).unwrap();
        assert_eq!(naive_pointwise_proximity(&id, &h, &gauss).unwrap(), LogReal::zero_val(5));
        assert_eq!(proximity(&id, &h, &gauss).unwrap(), LogReal::zero_val(5));
        assert_eq!(naive_pointwise_proximity(&id, &id, &s).unwrap(), vp(1, 5));
    }

    #[test]
    fn weighted_examples() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        let cfg = GreenConfig::new(&f, 3).unwrap();
        let zero = LogReal::zero_val(5);
        let w = weighted_proximity(&f, &one, &BerkPoint::gauss(b).unwrap(), 3, &cfg, &zero, DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(w, KernelValue::exact(zero));
        let l = Backend::laurent(2, 16).unwrap();
        let g = RationalMap::parse(l, "z+z^p").unwrap();
        let cfg = GreenConfig::new(&g, 3).unwrap();
        let s = BerkPoint::disk_vp(l.zero(), Rational::from_integer(1.into())).unwrap();
        let id = RationalMap::identity(l);
        let w = weighted_proximity(&g, &id, &s, 2, &cfg, &LogReal::zero_val(2), DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(w.value, vp(4, 2));
        assert_eq!(w.error, 0.0);
    }

    #[test]
    fn condition3_examples() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        let ns: Vec<u32> = (1..=8).collect();
        let seq = condition3_sequence(&f, &one, &BerkPoint::gauss(b).unwrap(), &ns, DEFAULT_DEGREE_BUDGET).unwrap();
        assert!(seq.iter().all(|v| *v == LogReal::zero_val(5)));
        let l = Backend::laurent(2, 16).unwrap();
        let g = RationalMap::parse(l, "z+z^p").unwrap();
        let s = BerkPoint::disk_vp(l.zero(), Rational::from_integer(2.into())).unwrap();
        let seq = condition3_sequence(&g, &RationalMap::identity(l), &s, &[1, 2, 4], DEFAULT_DEGREE_BUDGET).unwrap();
        assert!(seq.iter().all(|v| *v == vp(2, 2)));
        assert!(matches!(condition3_sequence(&g, &g, &s, &[1], DEFAULT_DEGREE_BUDGET), Err(Error::ZeroWedge)));
    }

    #[test]
    fn valiron_examples() {
        let b = q5();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        let mu = DiscreteMeasure::dirac(BerkPoint::gauss(b).unwrap());
        for n in 1..5 {
            let r = valiron_integral(&f, &one, &mu, n, DEFAULT_DEGREE_BUDGET).unwrap();
            assert_eq!(r.value, LogReal::zero_val(5));
        }
        let l = Backend::laurent(2, 16).unwrap();
        let g = RationalMap::parse(l, "z+z^p").unwrap();
        let r = valiron_integral(&g, &RationalMap::identity(l), &DiscreteMeasure::dirac(BerkPoint::gauss(l).unwrap()), 2, DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(r.value, LogReal::zero_val(2));
        // z^(2^n) maps N-th roots of unity onto m-th roots, m = N/2^n, and
        // the mean of log|w - 2| over those is log(2^m - 1)/m; [w, 2] = |w - 2|/√10
        let c = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let two = RationalMap::parse(Backend::Complex, "2").unwrap();
        let mu = roots_of_unity(1 << 10);
        for n in 2..=6 {
            let r = valiron_integral(&c, &two, &mu, n, DEFAULT_DEGREE_BUDGET).unwrap();
            let m = (1 << (10 - n)) as f64;
            let want = ((2f64.powf(m) - 1.0).ln() / m - 0.5 * 10f64.ln()) / (1u64 << n) as f64;
            assert!((r.value.to_f64() - want).abs() < 1e-12);
        }
        // all atoms are solutions of z^2 = 1
        let mu = DiscreteMeasure::uniform(vec![complex_point(Complex64::new(1.0, 0.0)), complex_point(Complex64::new(-1.0, 0.0))]).unwrap();
        assert!(matches!(valiron_integral(&c, &RationalMap::parse(Backend::Complex, "1").unwrap(), &mu, 1, 16), Err(Error::AllAtomsInfinite)));
    }

    fn padic_point(v: i64, u: i64) -> BerkPoint {
        let b = Backend::padic(5, 20).unwrap();
        BerkPoint::classical(b.uniformizer_pow(v).unwrap().try_mul(&b.from_i64(u)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn green_tail_certificate(re in -2.0f64..2.0, im in -2.0f64..2.0, n in 2u32..12) {
            let f = RationalMap::parse(Backend::Complex, "z^2-0.5+0.2i").unwrap();
            let z = complex_point(Complex64::new(re, im));
            let c1 = GreenConfig::new(&f, n).unwrap();
            let c2 = GreenConfig::new(&f, 2 * n).unwrap();
            let g1 = green(&f, &z, &c1).unwrap().to_f64();
            let g2 = green(&f, &z, &c2).unwrap().to_f64();
            prop_assert!((g1 - g2).abs() <= c1.tail_bound + 1e-14);
        }

        #[test]
        fn phi_is_symmetric(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
            let f = RationalMap::parse(Backend::Complex, "(z^2+0.5)/(z-0.25i)").unwrap();
            let cfg = GreenConfig::new(&f, 12).unwrap();
            let s = complex_point(Complex64::new(a, b));
            let t = complex_point(Complex64::new(c, d));
            prop_assert_eq!(phi_f(&f, &s, &t, &cfg).unwrap(), phi_f(&f, &t, &s, &cfg).unwrap());
        }

        #[test]
        fn phi_is_symmetric_padic(v1 in -2i64..3, u1 in 1i64..60, v2 in 0i64..3, c in 0i64..25) {
            let b = Backend::padic(5, 20).unwrap();
            let f = RationalMap::parse(b, "(z^2+5)/(5*z+1)").unwrap();
            let cfg = GreenConfig::new(&f, 5).unwrap();
            let s = padic_point(v1, u1);
            let t = disk(b, c, v2);
            prop_assert_eq!(phi_f(&f, &s, &t, &cfg).unwrap(), phi_f(&f, &t, &s, &cfg).unwrap());
        }

        #[test]
        fn two_routes_agree_complex(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = ProjectivePoint::complex(Complex64::new(re, im));
            for (f, a) in [("z^2", "1"), ("z^2-1", "z")] {
                let f = RationalMap::parse(Backend::Complex, f).unwrap();
                let a = RationalMap::parse(Backend::Complex, a).unwrap();
                let direct = proximity(&f, &a, &BerkPoint::Classical(z.clone())).unwrap().to_f64();
                let factored = factor_route_proximity(&f, &a, &z).unwrap().to_f64();
                prop_assert!((direct - factored).abs() < 1e-9);
            }
        }

        #[test]
        fn two_routes_agree_padic(v in -3i64..4, u in 1i64..200) {
            let b = Backend::padic(5, 20).unwrap();
            let f = RationalMap::parse(b, "(z^2+5)/(5*z+1)").unwrap();
            let a = RationalMap::parse(b, "z^3-2").unwrap();
            let s = padic_point(v, u);
            let pr = Proximity::new(&f, &a).unwrap();
            prop_assert_eq!(pr.eval(&s).unwrap(), pr.seminorm_route(&s).unwrap());
        }

        #[test]
        fn proximity_is_nonpositive(c in 0i64..125, v in -2i64..4) {
            let b = q5();
            let f = RationalMap::parse(b, "z^3+5*z").unwrap();
            let a = RationalMap::parse(b, "z^2-1").unwrap();
            prop_assert!(proximity(&f, &a, &disk(b, c, v)).unwrap() <= LogReal::zero_val(5));
        }

        #[test]
        fn weighted_correction_is_bounded(re in -2.0f64..2.0, im in -2.0f64..2.0, n in 1u32..4) {
            let f = RationalMap::parse(Backend::Complex, "z^2-1").unwrap();
            let a = RationalMap::parse(Backend::Complex, "2").unwrap();
            let cfg = GreenConfig::new(&f, 30).unwrap();
            let v_f = LogReal::Real(-0.1);
            let s = complex_point(Complex64::new(re, im));
            let w = weighted_proximity(&f, &a, &s, n, &cfg, &v_f, DEFAULT_DEGREE_BUDGET).unwrap();
            let p = proximity(&f.iterate(n, DEFAULT_DEGREE_BUDGET).unwrap(), &a, &s).unwrap();
            let sup_g = sup_t_bound(&f).unwrap() + 0.05;
            prop_assert!((w.to_f64() - p.to_f64()).abs() <= 2.0 * sup_g);
        }
    }
}
