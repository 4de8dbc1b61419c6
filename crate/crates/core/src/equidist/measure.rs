use std::io::Write;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::berkline::BerkPoint;
use crate::error::{invalid, Result};
use crate::scalar::Rational;

/// Finitely many atoms with positive rational weights.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    atoms: Vec<(BerkPoint, Rational)>,
    total: Rational,
}

#[derive(Serialize)]
struct AtomLine {
    point: String,
    weight: String,
    weight_f64: f64,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(BerkPoint, Rational)>) -> Result<DiscreteMeasure> {
        if atoms.is_empty() {
            return invalid("a measure needs at least one atom");
        }
        if let Some(b) = atoms.first().map(|(s, _)| s.backend()) {
            for (s, _) in &atoms {
                b.check(&s.backend().zero())?;
            }
        }
        if atoms.iter().any(|(_, w)| !w.is_positive()) {
            return invalid("atom weights must be positive");
        }
        let total = atoms.iter().fold(Rational::zero(), |acc, (_, w)| acc + w);
        Ok(DiscreteMeasure { atoms, total })
    }

    pub fn dirac(s: BerkPoint) -> DiscreteMeasure {
        DiscreteMeasure { atoms: vec![(s, Rational::one())], total: Rational::one() }
    }

    /// Probability measure giving each point the same weight.
    pub fn uniform(points: Vec<BerkPoint>) -> Result<DiscreteMeasure> {
        let w = Rational::new(1.into(), points.len().max(1).into());
        DiscreteMeasure::new(points.into_iter().map(|s| (s, w.clone())).collect())
    }

    pub fn atoms(&self) -> &[(BerkPoint, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> &Rational {
        &self.total
    }

    pub fn is_probability(&self) -> bool {
        self.total.is_one()
    }

    /// Weights as floats, in atom order.
    pub fn weights_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|(_, w)| w.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// One JSON object per line: `point`, `weight` (exact), `weight_f64`.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, w) in &self.atoms {
            let line = AtomLine { point: s.to_string(), weight: w.to_string(), weight_f64: w.to_f64().unwrap_or(f64::NAN) };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
