//! Complex roots by Aberth-Ehrlich iteration, and Hensel lifting of simple
//! residue roots over non-archimedean base fields.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{unsupported, Error, Result};
use crate::poly::Poly;
use crate::projline::ProjectivePoint;
use crate::scalar::{Backend, Residue, Scalar, Valuation};

/// Roots closer than this (relative to `max(1, |z|)`) are merged into one
/// root whose multiplicity is the cluster size.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// Residual below which a complex root counts as certified.
pub const RESIDUAL_THRESHOLD: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AberthConfig {
    pub max_sweeps: usize,
    /// Stop when every correction is below `tol * max(1, |z|)`.
    pub tol: f64,
    pub cluster_radius: f64,
}

impl Default for AberthConfig {
    fn default() -> Self {
        AberthConfig { max_sweeps: 2000, tol: 1e-13, cluster_radius: CLUSTER_RADIUS }
    }
}

#[derive(Clone, Debug)]
pub struct Root {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    /// `|p(r)| / (max_k |c_k| * max(1, |r|)^deg)`; 0 for exact roots at 0 and infinity.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct RootList {
    pub roots: Vec<Root>,
    pub converged: bool,
    pub sweeps: usize,
}

impl RootList {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn certified(&self) -> bool {
        self.converged && self.roots.iter().all(|r| r.residual <= RESIDUAL_THRESHOLD)
    }
}

/// `p(z) / p'(z)`, evaluated through the reversed polynomial when `|z| > 1`.
fn newton_ratio(c: &[Complex64], z: Complex64) -> Complex64 {
    let n = c.len() - 1;
    if z.norm_sqr() <= 1.0 {
        let mut p = c[n];
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        p / dp
    } else {
        let w = z.inv();
        let mut q = c[0];
        let mut dq = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            dq = dq * w + q;
            q = q * w + c[k];
        }
        if q.norm_sqr() == 0.0 {
            return q;
        }
        z / (Complex64::new(n as f64, 0.0) - w * dq / q)
    }
}

/// `|p(z)| / max(1, |z|)^n`.
fn scaled_value(c: &[Complex64], z: Complex64) -> f64 {
    if z.norm_sqr() <= 1.0 {
        c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * z + k).norm()
    } else {
        let w = z.inv();
        c.iter().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * w + k).norm()
    }
}

/// Starting points on circles given by the upper hull of `(k, log|c_k|)`.
fn initial_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(usize, f64)> =
        c.iter().enumerate().filter(|(_, x)| x.norm() > 0.0).map(|(k, x)| (k, x.norm().ln())).collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(n);
    for (e, w) in hull.windows(2).enumerate() {
        let (i, li) = w[0];
        let (k, lk) = w[1];
        let cnt = k - i;
        let r = ((li - lk) / cnt as f64).exp();
        let offset = 0.7 + 1.3 * e as f64;
        for j in 0..cnt {
            let th = std::f64::consts::TAU * j as f64 / cnt as f64 + offset / cnt as f64;
            out.push(Complex64::from_polar(r, th));
        }
    }
    out
}

/// Roots of `sum c_k z^k` viewed as a binary form of degree `form_degree`
/// (`form_degree - deg` roots sit at infinity).
pub fn complex_roots(c: &[Complex64], form_degree: usize) -> Result<RootList> {
    complex_roots_with(c, form_degree, &AberthConfig::default())
}

pub fn complex_roots_with(c: &[Complex64], form_degree: usize, cfg: &AberthConfig) -> Result<RootList> {
    if c.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite coefficient".into()));
    }
    let Some(deg) = c.iter().rposition(|x| x.norm() > 0.0) else {
        return Err(Error::InvalidArgument("zero polynomial has no root list".into()));
    };
    if deg > form_degree {
        return Err(Error::InvalidArgument("polynomial degree exceeds the form degree".into()));
    }
    let low = c.iter().position(|x| x.norm() > 0.0).unwrap();
    let mut roots = Vec::new();
    if form_degree > deg {
        roots.push(Root { point: ProjectivePoint::infinity(Backend::Complex), multiplicity: form_degree - deg, residual: 0.0 });
    }
    if low > 0 {
        roots.push(Root { point: ProjectivePoint::complex(Complex64::new(0.0, 0.0)), multiplicity: low, residual: 0.0 });
    }
    let q: Vec<Complex64> = c[low..=deg].to_vec();
    let n = q.len() - 1;
    if n == 0 {
        return Ok(RootList { roots, converged: true, sweeps: 0 });
    }
    let scale = q.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if n == 1 {
        let r = -q[0] / q[1];
        roots.push(Root { point: ProjectivePoint::complex(r), multiplicity: 1, residual: 0.0 });
        return Ok(RootList { roots, converged: true, sweeps: 0 });
    }
    let mut z = initial_guesses(&q);
    let mut done = vec![false; n];
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps && done.iter().any(|d| !d) {
        sweeps += 1;
        let snapshot = z.clone();
        let updates: Vec<(Complex64, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let zi = snapshot[i];
                if done[i] {
                    return (zi, true);
                }
                let r = newton_ratio(&q, zi);
                if !r.re.is_finite() || !r.im.is_finite() {
                    // p'(z) = 0 away from a root: nudge off the critical point
                    return (zi * Complex64::new(1.0, 1e-7) + 1e-12, false);
                }
                if r.norm() == 0.0 {
                    return (zi, true);
                }
                let s: Complex64 =
                    snapshot.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &zj)| (zi - zj).inv()).sum();
                let w = r / (Complex64::new(1.0, 0.0) - r * s);
                let w = if w.re.is_finite() && w.im.is_finite() { w } else { r };
                let nz = zi - w;
                (nz, w.norm() <= cfg.tol * zi.norm().max(1.0))
            })
            .collect();
        for (i, (nz, d)) in updates.into_iter().enumerate() {
            z[i] = nz;
            done[i] = d;
        }
    }
    let converged = done.iter().all(|d| *d);
    // merge clusters
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].re.partial_cmp(&z[b].re).unwrap_or(std::cmp::Ordering::Equal));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for a in 0..n {
        let ia = order[a];
        let thr = cfg.cluster_radius * z[ia].norm().max(1.0);
        for &ib in order.iter().skip(a + 1) {
            if z[ib].re - z[ia].re > thr * 2.0 {
                break;
            }
            if (z[ia] - z[ib]).norm() <= thr.max(cfg.cluster_radius * z[ib].norm().max(1.0)) {
                let (ra, rb) = (find(&mut parent, ia), find(&mut parent, ib));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut clusters: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        clusters.entry(r).or_default().push(i);
    }
    for members in clusters.values() {
        let m = members.len();
        let centre = members.iter().map(|&i| z[i]).sum::<Complex64>() / m as f64;
        let residual = scaled_value(&q, centre) / scale;
        roots.push(Root { point: ProjectivePoint::complex(centre), multiplicity: m, residual });
    }
    Ok(RootList { roots, converged, sweeps })
}

/// Roots lifted from simple roots of the reduction, plus a flag that is true
/// when they account for every root (`count == degree`).
#[derive(Clone, Debug)]
pub struct HenselRoots {
    pub roots: Vec<Scalar>,
    pub complete: bool,
}

fn residues(poly: &Poly) -> Result<Vec<u32>> {
    let n = poly.degree().map_or(0, |d| d + 1);
    let mut r = vec![0u32; n];
    for (k, c) in poly.terms() {
        r[k] = match c.residue()? {
            Residue::Value(v) => v,
            Residue::NotIntegral => return Err(Error::InvalidArgument("coefficients must be integral".into())),
        };
    }
    Ok(r)
}

fn eval_mod_p(c: &[u32], x: u32, p: u32) -> u32 {
    c.iter().rev().fold(0u64, |acc, &k| (acc * x as u64 + k as u64) % p as u64) as u32
}

/// Base-field roots lifted by Newton-Hensel iteration from simple roots of
/// the reduction mod the maximal ideal. The polynomial is first scaled so
/// that its largest coefficient is a unit.
pub fn hensel_simple_roots(poly: &Poly) -> Result<HenselRoots> {
    let b = poly.backend();
    let (Some(p), Some(prec)) = (b.prime(), b.precision()) else {
        return unsupported("Hensel lifting over the complex field");
    };
    let Some(deg) = poly.degree() else {
        return Err(Error::InvalidArgument("zero polynomial".into()));
    };
    let top = poly.max_abs_coeff()?.ok_or_else(|| Error::PrecisionExhausted("all coefficients indeterminate".into()))?;
    let v = match top.valuation()? {
        Valuation::Finite(v) => v,
        _ => unreachable!(),
    };
    let f = poly.scale(&b.uniformizer_pow(-v)?);
    let fbar = residues(&f)?;
    let dfbar: Vec<u32> = fbar.iter().enumerate().skip(1).map(|(k, &c)| ((k as u64 * c as u64) % p as u64) as u32).collect();
    let df = f.derivative();
    let fa = Poly::from_coeffs(b, f.to_dense().iter().map(|c| c.to_approx()).collect());
    let dfa = Poly::from_coeffs(b, df.to_dense().iter().map(|c| c.to_approx()).collect());
    let mut roots = Vec::new();
    for r in 0..p {
        if eval_mod_p(&fbar, r, p) != 0 || eval_mod_p(&dfbar, r, p) == 0 {
            continue;
        }
        let mut x = b.from_i64(r as i64).to_approx();
        for _ in 0..(2 * prec as usize + 8) {
            let fx = fa.eval(&x);
            if fx.is_zero() || fx.is_indeterminate() {
                break;
            }
            let dx = dfa.eval(&x);
            let step = fx.try_div(&dx)?;
            x = x.try_sub(&step)?;
        }
        roots.push(x.with_absolute_precision(prec as i64));
    }
    let complete = roots.len() == deg;
    Ok(HenselRoots { roots, complete })
}
