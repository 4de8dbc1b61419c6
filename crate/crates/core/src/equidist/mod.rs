//! Root measures, Newton polygons, skeleton profiles, sampling of the
//! equilibrium measure, and measure comparisons.

mod compare;
mod fpoly;
mod measure;
mod newton;
mod sample;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

pub use compare::{compare_measures, AnnulusBin, Comparison, DEFAULT_ANNULI};
pub use fpoly::FpPoly;
pub use measure::DiscreteMeasure;
pub use newton::{newton_polygon, NewtonPolygon, Segment};
pub use sample::{mu_sample, preimages, pullback, SampleConfig};

use crate::error::{unsupported, Error, Result};
use crate::polyroots::complex_roots;
use crate::ratmap::{HomogeneousForm, RationalMap};
use crate::scalar::{Rational, Residue, Valuation};
use crate::berkline::BerkPoint;

/// Key of the valuation histogram: the roots `0` and `∞` get `±∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ValuationKey {
    /// The root `∞` (valuation `-∞`).
    MinusInfinity,
    Finite(Rational),
    /// The root `0` (valuation `+∞`).
    PlusInfinity,
}

impl std::fmt::Display for ValuationKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValuationKey::MinusInfinity => write!(f, "-inf"),
            ValuationKey::Finite(v) => write!(f, "{v}"),
            ValuationKey::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// Tangent directions at the Gauss point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    /// The direction containing the open unit disk at 0.
    TowardZero,
    /// The direction containing `|z| > 1` and `∞`.
    TowardInfinity,
    /// Directions of residue classes of units, grouped by irreducible factor.
    Residue,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionMass {
    pub kind: DirectionKind,
    /// Degree of the irreducible factor over `F_p` (1 for the two pseudo-directions).
    pub factor_degree: usize,
    /// Roots per direction, counted with multiplicity.
    pub multiplicity: usize,
    /// Number of irreducible factors with this degree and multiplicity.
    pub factors: usize,
    pub mass_per_direction: Rational,
}

/// Summary of `ν_n^a` over a non-archimedean field: root valuations and the
/// distribution of roots among directions at the Gauss point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonProfile {
    pub total: usize,
    pub valuation_histogram: Vec<(ValuationKey, Rational)>,
    pub directions: Vec<DirectionMass>,
    pub max_direction_mass: Rational,
    /// Mass of the roots with `|z| != 1` (including `0` and `∞`).
    pub mass_off_unit_sphere: Rational,
}

#[derive(Serialize)]
struct ProfileJson {
    total: usize,
    valuation_histogram: Vec<HistJson>,
    directions: Vec<DirJson>,
    max_direction_mass: String,
    mass_off_unit_sphere: String,
}

#[derive(Serialize)]
struct HistJson {
    valuation: String,
    mass: String,
}

#[derive(Serialize)]
struct DirJson {
    kind: DirectionKind,
    factor_degree: usize,
    multiplicity: usize,
    factors: usize,
    mass_per_direction: String,
}

impl SkeletonProfile {
    pub fn total_mass(&self) -> Rational {
        self.valuation_histogram.iter().fold(Rational::zero(), |a, (_, m)| a + m)
    }

    pub fn mass_at(&self, key: &ValuationKey) -> Rational {
        self.valuation_histogram.iter().find(|(k, _)| k == key).map_or_else(Rational::zero, |(_, m)| m.clone())
    }

    /// JSON with exact rationals as strings.
    pub fn to_json(&self) -> serde_json::Value {
        let j = ProfileJson {
            total: self.total,
            valuation_histogram: self.valuation_histogram.iter().map(|(k, m)| HistJson { valuation: k.to_string(), mass: m.to_string() }).collect(),
            directions: self
                .directions
                .iter()
                .map(|d| DirJson {
                    kind: d.kind,
                    factor_degree: d.factor_degree,
                    multiplicity: d.multiplicity,
                    factors: d.factors,
                    mass_per_direction: d.mass_per_direction.to_string(),
                })
                .collect(),
            max_direction_mass: self.max_direction_mass.to_string(),
            mass_off_unit_sphere: self.mass_off_unit_sphere.to_string(),
        };
        serde_json::to_value(j).expect("profile serializes")
    }
}

fn ratio(a: usize, b: usize) -> Rational {
    Rational::new((a as i64).into(), (b as i64).into())
}

/// Profile of the projective roots of a binary form.
pub fn profile_of_form(w: &HomogeneousForm) -> Result<SkeletonProfile> {
    let b = w.poly().backend();
    let Some(p) = b.prime() else {
        return unsupported("skeleton profiles over C");
    };
    let total = w.degree();
    let np = newton_polygon(w.poly())?;
    let z0 = np.zero_multiplicity;
    let hi = z0 + np.nonzero_root_count();
    let inf = total - hi;

    let mut hist: Vec<(ValuationKey, usize)> = Vec::new();
    if inf > 0 {
        hist.push((ValuationKey::MinusInfinity, inf));
    }
    let mut toward_zero = z0;
    let mut toward_inf = inf;
    let mut unit_roots = 0;
    for (v, len) in np.valuations() {
        if v > Rational::zero() {
            toward_zero += len;
        } else if v < Rational::zero() {
            toward_inf += len;
        } else {
            unit_roots = len;
        }
        hist.push((ValuationKey::Finite(v), len));
    }
    if z0 > 0 {
        hist.push((ValuationKey::PlusInfinity, z0));
    }
    hist.sort();

    let mut directions = Vec::new();
    for (kind, count) in [(DirectionKind::TowardZero, toward_zero), (DirectionKind::TowardInfinity, toward_inf)] {
        if count > 0 {
            directions.push(DirectionMass { kind, factor_degree: 1, multiplicity: count, factors: 1, mass_per_direction: ratio(count, total) });
        }
    }
    if unit_roots > 0 {
        for (k, m, n) in unit_residue_poly(w, p)?.factor_degrees() {
            directions.push(DirectionMass {
                kind: DirectionKind::Residue,
                factor_degree: k,
                multiplicity: m,
                factors: n,
                mass_per_direction: ratio(m, total),
            });
        }
    }
    let max_direction_mass = directions.iter().map(|d| d.mass_per_direction.clone()).max().unwrap_or_else(Rational::zero);
    Ok(SkeletonProfile {
        total,
        valuation_histogram: hist.into_iter().map(|(k, c)| (k, ratio(c, total))).collect(),
        directions,
        max_direction_mass,
        mass_off_unit_sphere: ratio(toward_zero + toward_inf, total),
    })
}

/// Reduction of `W / π^vmin` with its power of `z` removed: its roots are the
/// residues of the unit roots.
fn unit_residue_poly(w: &HomogeneousForm, p: u32) -> Result<FpPoly> {
    let b = w.poly().backend();
    let mut vmin: Option<i64> = None;
    for (_, c) in w.poly().terms() {
        if let Valuation::Finite(v) = c.valuation()? {
            vmin = Some(vmin.map_or(v, |m| m.min(v)));
        }
    }
    let scale = b.uniformizer_pow(-vmin.unwrap_or(0))?;
    let mut res: Vec<(usize, u32)> = Vec::new();
    for (k, c) in w.poly().terms() {
        match c.try_mul(&scale)?.residue()? {
            Residue::Value(0) => {}
            Residue::Value(r) => res.push((k, r)),
            Residue::NotIntegral => unreachable!("scaled by the minimal valuation"),
        }
    }
    let i0 = res.first().map_or(0, |(k, _)| *k);
    let i1 = res.last().map_or(0, |(k, _)| *k);
    let mut dense = vec![0u32; i1 - i0 + 1];
    for (k, r) in res {
        dense[k - i0] = r;
    }
    Ok(FpPoly::new(p, dense))
}

/// `ν_n^a` over `C`: the roots of `f^n = a` with multiplicity.
#[derive(Clone, Debug)]
pub struct ComplexNu {
    pub measure: DiscreteMeasure,
    /// `d^n + deg a`.
    pub degree: usize,
    pub converged: bool,
    pub max_residual: f64,
}

#[derive(Clone, Debug)]
pub enum NuMeasure {
    Atoms(ComplexNu),
    Profile(SkeletonProfile),
}

fn solutions_form(f: &RationalMap, a: &RationalMap, n: u32, budget: u128) -> Result<HomogeneousForm> {
    f.iterate(n, budget)?.wedge_form(a)
}

pub fn nu_complex(f: &RationalMap, a: &RationalMap, n: u32, budget: u128) -> Result<ComplexNu> {
    if !f.backend().is_archimedean() {
        return unsupported("atomic root measures over a non-archimedean field");
    }
    let w = solutions_form(f, a, n, budget)?;
    let rl = complex_roots(&w.poly().complex_coeffs().unwrap(), w.degree())?;
    let total = w.degree();
    if rl.total_multiplicity() != total {
        return Err(Error::NonConvergence { sweeps: rl.sweeps });
    }
    let max_residual = rl.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
    let atoms = rl.roots.into_iter().map(|r| (BerkPoint::Classical(r.point), ratio(r.multiplicity, total))).collect();
    Ok(ComplexNu { measure: DiscreteMeasure::new(atoms)?, degree: total, converged: rl.converged, max_residual })
}

pub fn skeleton_profile(f: &RationalMap, a: &RationalMap, n: u32, budget: u128) -> Result<SkeletonProfile> {
    profile_of_form(&solutions_form(f, a, n, budget)?)
}

/// Atoms over `C`, a skeleton profile otherwise.
pub fn nu_measure(f: &RationalMap, a: &RationalMap, n: u32, budget: u128) -> Result<NuMeasure> {
    if f.backend().is_archimedean() {
        Ok(NuMeasure::Atoms(nu_complex(f, a, n, budget)?))
    } else {
        Ok(NuMeasure::Profile(skeleton_profile(f, a, n, budget)?))
    }
}

/// Float value of a rational mass.
pub fn mass_f64(m: &Rational) -> f64 {
    m.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::ratmap::DEFAULT_DEGREE_BUDGET;
    use crate::scalar::{Backend, Scalar};
    use num_complex::Complex64;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn additive_counterexample_profile() {
        for (p, j) in [(2u32, 0u32), (2, 1), (3, 1)] {
            let b = Backend::laurent(p, 8).unwrap();
            let f = RationalMap::parse(b, "z+z^p").unwrap();
            let n = p.pow(j);
            let big = (p as usize).pow(n);
            let prof = skeleton_profile(&f, &RationalMap::identity(b), n, DEFAULT_DEGREE_BUDGET).unwrap();
            assert_eq!(prof.mass_at(&ValuationKey::PlusInfinity), ratio(big, big + 1));
            assert_eq!(prof.mass_at(&ValuationKey::MinusInfinity), ratio(1, big + 1));
            assert_eq!(prof.total_mass(), Rational::one());
            assert_eq!(prof.max_direction_mass, ratio(big, big + 1));
            assert_eq!(prof.mass_off_unit_sphere, Rational::one());
        }
    }

    #[test]
    fn z_squared_profiles() {
        let b = Backend::padic(5, 10).unwrap();
        let f = RationalMap::parse(b, "z^2").unwrap();
        let one = RationalMap::parse(b, "1").unwrap();
        let prof = skeleton_profile(&f, &one, 2, DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(prof.valuation_histogram, vec![(ValuationKey::Finite(Rational::zero()), Rational::one())]);
        assert_eq!(prof.max_direction_mass, ratio(1, 4));
        assert_eq!(prof.directions.len(), 1);
        assert_eq!((prof.directions[0].factor_degree, prof.directions[0].factors), (1, 4));
        let json = prof.to_json();
        assert_eq!(json["max_direction_mass"], "1/4");

        let c = RationalMap::parse(Backend::Complex, "z^2").unwrap();
        let one = RationalMap::parse(Backend::Complex, "1").unwrap();
        let nu = nu_complex(&c, &one, 3, DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(nu.measure.len(), 8);
        assert!(nu.measure.atoms().iter().all(|(s, w)| {
            *w == ratio(1, 8) && matches!(s, BerkPoint::Classical(z) if (z.affine_value().unwrap().abs().unwrap() - 1.0).abs() < 1e-12)
        }));
    }

    #[test]
    fn residue_directions_with_ramification() {
        // z^2 - 5 has both roots of valuation 1/2: all mass toward 0
        let b = Backend::padic(5, 10).unwrap();
        let w = HomogeneousForm::new(2, Poly::from_coeffs(b, vec![b.from_i64(-5), b.zero(), b.one()])).unwrap();
        let prof = profile_of_form(&w).unwrap();
        assert_eq!(prof.directions[0].kind, DirectionKind::TowardZero);
        assert_eq!(prof.max_direction_mass, Rational::one());
        // (z^2 + 2)(z - 1)^2 over Q_5: x^2 + 2 is irreducible mod 5
        let f = Poly::from_coeffs(b, vec![b.from_i64(2), b.zero(), b.one()]);
        let g = Poly::from_coeffs(b, vec![b.from_i64(-1), b.one()]);
        let w = HomogeneousForm::new(5, f.mul(&g).mul(&g)).unwrap();
        let prof = profile_of_form(&w).unwrap();
        let res: Vec<_> = prof.directions.iter().map(|d| (d.kind, d.factor_degree, d.multiplicity, d.factors)).collect();
        assert!(res.contains(&(DirectionKind::Residue, 1, 2, 1)));
        assert!(res.contains(&(DirectionKind::Residue, 2, 1, 1)));
        assert!(res.contains(&(DirectionKind::TowardInfinity, 1, 1, 1)));
        assert_eq!(prof.max_direction_mass, ratio(2, 5));
    }

    #[test]
    fn degree_accounting_with_infinity() {
        let c = RationalMap::parse(Backend::Complex, "z^2-1").unwrap();
        let nu = nu_complex(&c, &RationalMap::identity(Backend::Complex), 3, DEFAULT_DEGREE_BUDGET).unwrap();
        assert_eq!(nu.degree, 9);
        assert_eq!(nu.measure.total_mass(), &Rational::one());
        let inf: Rational = nu.measure.atoms().iter().filter(|(s, _)| s.is_infinity()).map(|(_, w)| w.clone()).sum();
        assert_eq!(inf, ratio(1, 9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn complex_mass_conservation(re in -1.0f64..1.0, im in -1.0f64..1.0, n in 1u32..5) {
            let b = Backend::Complex;
            let f = RationalMap::parse(b, "z^2+0.25i").unwrap();
            let a = RationalMap::constant(&crate::projline::ProjectivePoint::affine(Scalar::Complex(Complex64::new(re, im))));
            let nu = nu_complex(&f, &a, n, DEFAULT_DEGREE_BUDGET).unwrap();
            prop_assert_eq!(nu.degree, 1 << n);
            prop_assert_eq!(nu.measure.total_mass(), &Rational::one());
        }

        #[test]
        fn profile_mass_conservation(c in proptest::collection::vec(-30i64..30, 2..9), k in 0usize..3) {
            let b = Backend::padic(3, 12).unwrap();
            let coeffs: Vec<Scalar> = c.iter().map(|&x| b.from_i64(x)).collect();
            prop_assume!(c.iter().any(|&x| x != 0));
            let deg = coeffs.len() - 1 + k;
            let w = HomogeneousForm::new(deg, Poly::from_coeffs(b, coeffs)).unwrap();
            let prof = profile_of_form(&w).unwrap();
            prop_assert_eq!(prof.total_mass(), Rational::one());
            let dir: Rational = prof.directions.iter().map(|d| d.mass_per_direction.clone() * ratio(d.factor_degree * d.factors, 1)).sum();
            prop_assert_eq!(dir, Rational::one());
        }
    }
}
