use rayon::prelude::*;

use crate::berkline::BerkPoint;
use crate::error::{unsupported, Result};
use crate::potential::{GreenConfig, Potential};
use crate::ratmap::RationalMap;

use super::DiscreteMeasure;

/// Default radii delimiting the annuli `inner <= |z| < outer`.
pub const DEFAULT_ANNULI: [f64; 8] = [0.0, 0.5, 0.9, 0.99, 1.01, 1.1, 2.0, f64::INFINITY];

/// Test points closer than this (chordally) to an atom are skipped.
const COLLISION_CHORDAL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusBin {
    pub inner: f64,
    pub outer: f64,
    pub mass_nu: f64,
    pub mass_mu: f64,
}

/// Potential discrepancy `|U_ν - U_μ|` over test points.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub sup: f64,
    pub mean: f64,
    /// Largest error radius among the compared values.
    pub error: f64,
    pub used: usize,
    /// Test points skipped because they collide with an atom.
    pub skipped: usize,
    pub annuli: Vec<AnnulusBin>,
}

fn modulus(s: &BerkPoint) -> f64 {
    match s {
        BerkPoint::Classical(z) => z.affine_value().map_or(f64::INFINITY, |a| a.abs().unwrap_or(f64::NAN)),
        BerkPoint::Disk { .. } => f64::NAN,
    }
}

fn annulus_masses(mu: &DiscreteMeasure, edges: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; edges.len().saturating_sub(1)];
    for ((s, _), w) in mu.atoms().iter().zip(mu.weights_f64()) {
        let r = modulus(s);
        let k = edges.windows(2).position(|e| e[0] <= r && (r < e[1] || (e[1].is_infinite() && r.is_infinite())));
        if let Some(k) = k {
            out[k] += w;
        }
    }
    out
}

fn collides(s: &BerkPoint, mu: &DiscreteMeasure) -> bool {
    let BerkPoint::Classical(z) = s else { return false };
    mu.atoms().iter().any(|(a, _)| match a {
        BerkPoint::Classical(w) => z.chordal(w).is_ok_and(|c| c < COLLISION_CHORDAL),
        _ => false,
    })
}

/// Compares two complex measures through their `Φ_F` potentials.
pub fn compare_measures(
    nu: &DiscreteMeasure,
    mu: &DiscreteMeasure,
    f: &RationalMap,
    test_points: &[BerkPoint],
    cfg: &GreenConfig,
    edges: &[f64],
) -> Result<Comparison> {
    if !f.backend().is_archimedean() {
        return unsupported("potential comparison over a non-archimedean field");
    }
    let un = Potential::new(f, nu, cfg)?;
    let um = Potential::new(f, mu, cfg)?;
    let diffs = test_points
        .par_iter()
        .map(|s| {
            if collides(s, nu) || collides(s, mu) {
                return Ok(None);
            }
            let (a, b) = (un.eval(s)?, um.eval(s)?);
            if a.is_neg_inf() || b.is_neg_inf() {
                return Ok(None);
            }
            Ok(Some(((a.to_f64() - b.to_f64()).abs(), a.error + b.error)))
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<(f64, f64)> = diffs.iter().flatten().copied().collect();
    let sup = used.iter().map(|d| d.0).fold(0.0, f64::max);
    let mean = if used.is_empty() { f64::NAN } else { used.iter().map(|d| d.0).sum::<f64>() / used.len() as f64 };
    let error = used.iter().map(|d| d.1).fold(0.0, f64::max);
    let (mn, mm) = (annulus_masses(nu, edges), annulus_masses(mu, edges));
    let annuli = edges
        .windows(2)
        .zip(mn.into_iter().zip(mm))
        .map(|(e, (a, b))| AnnulusBin { inner: e[0], outer: e[1], mass_nu: a, mass_mu: b })
        .collect();
    Ok(Comparison { sup, mean, error, used: used.len(), skipped: diffs.len() - used.len(), annuli })
}
