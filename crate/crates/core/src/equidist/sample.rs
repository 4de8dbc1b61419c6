use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::berkline::BerkPoint;
use crate::error::{unsupported, Error, Result};
use crate::polyroots::complex_roots;
use crate::projline::ProjectivePoint;
use crate::ratmap::RationalMap;
use crate::scalar::Rational;

use super::DiscreteMeasure;

#[derive(Clone, Copy, Debug)]
pub struct SampleConfig {
    pub depth: u32,
    /// Largest number of atoms kept per level.
    pub cap: usize,
    pub rng_seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { depth: 12, cap: 4096, rng_seed: 0 }
    }
}

/// Solutions of `f(z) = w` with multiplicity (complex).
pub fn preimages(f: &RationalMap, w: &ProjectivePoint) -> Result<Vec<(ProjectivePoint, usize)>> {
    if !f.backend().is_archimedean() {
        return unsupported("preimage enumeration over a non-archimedean field");
    }
    let form = f.wedge_form(&RationalMap::constant(w))?;
    let rl = complex_roots(&form.poly().complex_coeffs().unwrap(), form.degree())?;
    if !rl.converged || rl.total_multiplicity() != f.degree() {
        return Err(Error::NonConvergence { sweeps: rl.sweeps });
    }
    Ok(rl.roots.into_iter().map(|r| (r.point, r.multiplicity)).collect())
}

fn backward_step(f: &RationalMap, level: &[(ProjectivePoint, Rational)]) -> Result<Vec<(ProjectivePoint, Rational)>> {
    let d = Rational::from_integer((f.degree() as i64).into());
    let parts = level
        .par_iter()
        .map(|(w, wt)| {
            Ok(preimages(f, w)?
                .into_iter()
                .map(|(z, m)| (z, wt * Rational::from_integer((m as i64).into()) / &d))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn classical_atoms(mu: &DiscreteMeasure) -> Result<Vec<(ProjectivePoint, Rational)>> {
    mu.atoms()
        .iter()
        .map(|(s, w)| match s {
            BerkPoint::Classical(z) => Ok((z.clone(), w.clone())),
            _ => unsupported("pullback of non-classical atoms"),
        })
        .collect()
}

fn to_measure(level: Vec<(ProjectivePoint, Rational)>) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(level.into_iter().map(|(z, w)| (BerkPoint::Classical(z), w)).collect())
}

/// `f^*μ / d`: every atom spread over its preimages by multiplicity.
pub fn pullback(f: &RationalMap, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    to_measure(backward_step(f, &classical_atoms(mu)?)?)
}

/// A discrete approximation of `μ_f` by backward iteration from `seed`.
///
/// Over `C` the full preimage tree is used while it has at most `cap` atoms;
/// past that, each level keeps `cap` preimages chosen uniformly at random and
/// reweights them uniformly. Over non-archimedean fields only maps with good
/// reduction are supported, where `μ_f` is the Dirac mass at the Gauss point.
pub fn mu_sample(f: &RationalMap, seed: &BerkPoint, cfg: &SampleConfig) -> Result<DiscreteMeasure> {
    let b = f.backend();
    if !b.is_archimedean() {
        if f.good_reduction()? {
            return Ok(DiscreteMeasure::dirac(BerkPoint::gauss(b)?));
        }
        return unsupported("sampling the equilibrium measure of a map without good reduction");
    }
    let BerkPoint::Classical(z0) = seed else {
        return unsupported("non-classical seeds over C");
    };
    if f.is_exceptional(z0)? {
        return Err(Error::ExceptionalSeed);
    }
    if cfg.cap == 0 {
        return Err(Error::InvalidArgument("sample cap must be positive".into()));
    }
    let mut level = vec![(z0.clone(), Rational::from_integer(1.into()))];
    for depth in 0..cfg.depth {
        let next = backward_step(f, &level)?;
        level = if next.len() <= cfg.cap {
            next
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(u64::from(depth).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let mut keep = index::sample(&mut rng, next.len(), cfg.cap).into_vec();
            keep.sort_unstable();
            let w = Rational::new(1.into(), (cfg.cap as i64).into());
            keep.into_iter().map(|i| (next[i].0.clone(), w.clone())).collect()
        };
    }
    to_measure(level)
}
