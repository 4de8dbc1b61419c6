//! Experiment configuration, read from a TOML file.

use std::path::{Path, PathBuf};

use berkdyn::berkline::BerkPoint;
use berkdyn::ratmap::{RationalMap, DEFAULT_DEGREE_BUDGET};
use berkdyn::scalar::{Backend, Scalar};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    backend: String,
    map: String,
    target: Option<String>,
    n: Option<RawRange>,
    #[serde(default)]
    points: Vec<String>,
    #[serde(default)]
    scales: Vec<String>,
    #[serde(default)]
    sample: RawSample,
    #[serde(default)]
    green: RawGreen,
    #[serde(default)]
    escape: RawEscape,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRange {
    List(Vec<u32>),
    Span(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSample {
    depth: Option<u32>,
    cap: Option<usize>,
    rng_seed: Option<u64>,
    seed_point: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGreen {
    iterations: Option<u32>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEscape {
    max_iter: Option<u32>,
    radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub budget: Option<u128>,
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub backend: Backend,
    pub map_text: String,
    pub map: RationalMap,
    pub target_text: Option<String>,
    pub target: Option<RationalMap>,
    pub ns: Vec<u32>,
    /// Points with their source text, in file order.
    pub points: Vec<(String, BerkPoint)>,
    /// Lift scalings `c` for the `green(cF) - green(F)` rows.
    pub scales: Vec<(String, Scalar)>,
    pub depth: u32,
    pub cap: usize,
    pub rng_seed: u64,
    pub seed_point: BerkPoint,
    pub green_iterations: Option<u32>,
    pub green_tolerance: f64,
    pub escape_max_iter: u32,
    pub escape_radius: f64,
    pub out_dir: PathBuf,
    pub budget: u128,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `complex`, `padic <p> <N>` or `laurent <p> <N>`.
pub fn parse_backend(s: &str) -> Result<Backend, CliError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let num = |k: usize| -> Result<u32, CliError> {
        parts.get(k).and_then(|x| x.parse().ok()).ok_or_else(|| config_err(format!("bad backend {s:?}")))
    };
    let b = match parts.first().copied() {
        Some("complex") if parts.len() == 1 => Ok(Backend::Complex),
        Some("padic") if parts.len() == 3 => Backend::padic(num(1)?, num(2)?),
        Some("laurent") if parts.len() == 3 => Backend::laurent(num(1)?, num(2)?),
        _ => return Err(config_err(format!("backend must be `complex`, `padic p N` or `laurent p N`, got {s:?}"))),
    };
    b.map_err(|e| config_err(e.to_string()))
}

/// `"a..b"` (inclusive) or a single integer.
fn parse_span(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || config_err(format!("bad n-range {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text, ov)
    }

    pub fn from_toml(text: &str, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let backend = parse_backend(&raw.backend)?;
        let map = RationalMap::parse(backend, &raw.map).map_err(|e| config_err(format!("map: {e}")))?;
        let target = match &raw.target {
            Some(t) => Some(RationalMap::parse(backend, t).map_err(|e| config_err(format!("target: {e}")))?),
            None => None,
        };
        let mut ns = match &raw.n {
            None => vec![1],
            Some(RawRange::List(v)) => v.clone(),
            Some(RawRange::Span(s)) => parse_span(s)?,
        };
        ns.sort_unstable();
        ns.dedup();
        if ns.is_empty() {
            return Err(config_err("empty n-range"));
        }
        let budget = ov.budget.unwrap_or(DEFAULT_DEGREE_BUDGET);
        let nmax = *ns.last().unwrap();
        let top = (map.degree() as u128).checked_pow(nmax);
        if top.is_none_or(|deg| deg > budget) {
            return Err(config_err(format!("degree {}^{nmax} exceeds the degree budget {budget}", map.degree())));
        }
        let points = raw
            .points
            .iter()
            .map(|s| Ok((s.clone(), BerkPoint::parse(backend, s).map_err(|e| config_err(format!("point {s:?}: {e}")))?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let scales = raw
            .scales
            .iter()
            .map(|s| {
                let c = backend.parse_scalar(s).map_err(|e| config_err(format!("scale {s:?}: {e}")))?;
                if c.is_zero() {
                    return Err(config_err("a lift scale must be nonzero"));
                }
                Ok((s.clone(), c))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let seed_text = raw.sample.seed_point.as_deref().unwrap_or("2");
        let seed_point = BerkPoint::parse(backend, seed_text).map_err(|e| config_err(format!("seed_point: {e}")))?;
        let green_tolerance = raw.green.tolerance.unwrap_or(1e-10);
        if !(green_tolerance > 0.0) {
            return Err(config_err("green.tolerance must be positive"));
        }
        let escape_radius = raw.escape.radius.unwrap_or(2.0);
        if !(escape_radius > 1.0) {
            return Err(config_err("escape.radius must exceed 1"));
        }
        let cap = raw.sample.cap.unwrap_or(4096);
        if cap == 0 {
            return Err(config_err("sample.cap must be positive"));
        }
        Ok(ExperimentConfig {
            backend,
            map_text: raw.map.clone(),
            map,
            target_text: raw.target.clone(),
            target,
            ns,
            points,
            scales,
            depth: raw.sample.depth.unwrap_or(12),
            cap,
            rng_seed: ov.seed.or(raw.sample.rng_seed).unwrap_or(0),
            seed_point,
            green_iterations: raw.green.iterations,
            green_tolerance,
            escape_max_iter: raw.escape.max_iter.unwrap_or(64),
            escape_radius,
            out_dir: ov.out.clone().or(raw.output.dir).unwrap_or_else(|| PathBuf::from("out")),
            budget,
        })
    }

    pub fn require_target(&self) -> Result<&RationalMap, CliError> {
        self.target.as_ref().ok_or_else(|| config_err("this experiment needs a `target`"))
    }

    pub fn require_points(&self) -> Result<&[(String, BerkPoint)], CliError> {
        if self.points.is_empty() {
            return Err(config_err("this experiment needs a non-empty `points` list"));
        }
        Ok(&self.points)
    }
}
