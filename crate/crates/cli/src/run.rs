//! The experiments behind each subcommand.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use berkdyn::berkline::{seminorm_at, BerkPoint};
use berkdyn::equidist::{
    compare_measures, mass_f64, mu_sample, newton_polygon, nu_complex, skeleton_profile, DiscreteMeasure, SampleConfig,
    DEFAULT_ANNULI,
};
use berkdyn::potential::{
    complex_point, condition3_sequence, green, naive_pointwise_proximity, proximity, v_f_estimate, weighted_proximity,
    GreenConfig,
};
use berkdyn::ratmap::RationalMap;
use berkdyn::scalar::Rational;
use log::{info, warn};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::escape::{escape_test, Escape};
use crate::output::{out_path, write_csv, Row, RowCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Equidist,
    Condition3,
    Green,
    Proximity,
    Escape,
    Newton,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Equidist => "equidist",
            Experiment::Condition3 => "condition3",
            Experiment::Green => "green",
            Experiment::Proximity => "proximity",
            Experiment::Escape => "escape",
            Experiment::Newton => "newton",
        }
    }
}

type Task = berkdyn::Result<Vec<Row>>;

/// Runs one experiment and writes `<out>/<name>.csv` (plus JSON-lines files
/// for equidist). Returns the CSV path.
pub fn run(exp: Experiment, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    info!("{} on {} (backend {})", exp.name(), cfg.map_text, cfg.backend);
    let ctx = RowCtx { map: cfg.map_text.clone(), target: cfg.target_text.clone().unwrap_or_default() };
    let mut rows = Vec::new();
    let tasks = match exp {
        Experiment::Equidist => equidist(cfg, &ctx, &mut rows),
        Experiment::Condition3 => condition3(cfg, &ctx),
        Experiment::Green => green_rows(cfg, &ctx),
        Experiment::Proximity => proximity_rows(cfg, &ctx, &mut rows),
        Experiment::Escape => escape_rows(cfg, &ctx),
        Experiment::Newton => newton_rows(cfg, &ctx),
    };
    // a failure before any per-row work still leaves a flagged file behind
    let tasks = match tasks {
        Err(CliError::Compute(e)) => vec![(String::new(), None, Err(e))],
        other => other?,
    };
    let mut failed = 0;
    for (point, n, t) in tasks {
        match t {
            Ok(r) => rows.extend(r),
            Err(e) => {
                failed += 1;
                warn!("{point} n={n:?}: {e}");
                rows.push(ctx.row(&point, n, "error", f64::NAN).note(e.to_string()));
            }
        }
    }
    let path = out_path(&cfg.out_dir, &format!("{}.csv", exp.name()))?;
    write_csv(&path, &rows)?;
    if failed > 0 {
        return Err(CliError::Partial { failed, path: path.display().to_string() });
    }
    Ok(path)
}

fn green_config(cfg: &ExperimentConfig) -> berkdyn::Result<GreenConfig> {
    match cfg.green_iterations {
        Some(k) => GreenConfig::new(&cfg.map, k),
        None => GreenConfig::with_tolerance(&cfg.map, cfg.green_tolerance),
    }
}

fn sample_config(cfg: &ExperimentConfig) -> SampleConfig {
    SampleConfig { depth: cfg.depth, cap: cfg.cap, rng_seed: cfg.rng_seed }
}

/// 64 points on eight circles straddling `|z| = 1`.
pub fn default_test_points() -> Vec<(String, BerkPoint)> {
    let radii = [0.5, 0.8, 0.9, 0.99, 1.01, 1.1, 1.25, 2.0];
    let mut out = Vec::with_capacity(64);
    for (i, r) in radii.into_iter().enumerate() {
        for k in 0..8 {
            let th = std::f64::consts::TAU * (k as f64 + 0.5_f64.sqrt() * (i + 1) as f64) / 8.0;
            let s = complex_point(Complex64::from_polar(r, th));
            out.push((s.to_string(), s));
        }
    }
    out
}

fn non_archimedean(cfg: &ExperimentConfig, what: &str) -> Result<u32, CliError> {
    cfg.backend.prime().ok_or_else(|| CliError::Config(format!("{what} needs a non-archimedean backend")))
}

/// `Some(note)` when the target is a constant in the exceptional set.
fn exceptional_warning(f: &RationalMap, a: &RationalMap) -> berkdyn::Result<Option<String>> {
    if a.degree() != 0 {
        return Ok(None);
    }
    let pt = a.evaluate(&berkdyn::projline::ProjectivePoint::infinity(f.backend()))?;
    Ok(f.is_exceptional(&pt)?.then(|| format!("target {pt} is exceptional; equidistribution is not expected")))
}

fn write_jsonl(path: PathBuf, lines: &[serde_json::Value]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in lines {
        serde_json::to_writer(&mut w, l).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_measure(path: PathBuf, mu: &DiscreteMeasure) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    mu.write_json_lines(&mut w)?;
    w.flush()?;
    Ok(())
}

type Tasks = Vec<(String, Option<u32>, Task)>;

fn equidist(cfg: &ExperimentConfig, ctx: &RowCtx, head: &mut Vec<Row>) -> Result<Tasks, CliError> {
    let f = &cfg.map;
    let a = cfg.require_target()?;
    if let Some(note) = exceptional_warning(f, a)? {
        warn!("{note}");
        head.push(ctx.row("", None, "warning", f64::NAN).note(note));
    }
    if cfg.backend.is_archimedean() {
        return equidist_complex(cfg, ctx, f, a);
    }
    let good = f.good_reduction()?;
    let results: Vec<_> = cfg
        .ns
        .par_iter()
        .map(|&n| {
            let prof = skeleton_profile(f, a, n, cfg.budget)?;
            let mut rows = Vec::new();
            for (k, m) in &prof.valuation_histogram {
                rows.push(ctx.row(&format!("v={k}"), Some(n), "valuation_mass", mass_f64(m)).exact(m.to_string()));
            }
            let m = &prof.max_direction_mass;
            let mut r = ctx.row("gauss", Some(n), "max_direction_mass", mass_f64(m)).exact(m.to_string());
            if good {
                r = r.note("good reduction: 0 for the Gauss-point limit");
            }
            rows.push(r);
            let m = &prof.mass_off_unit_sphere;
            rows.push(ctx.row("gauss", Some(n), "mass_off_unit_sphere", mass_f64(m)).exact(m.to_string()));
            let json = serde_json::json!({ "n": n, "profile": prof.to_json() });
            Ok((rows, json))
        })
        .collect::<Vec<berkdyn::Result<_>>>();
    let mut lines = Vec::new();
    let mut tasks = Vec::new();
    for (&n, r) in cfg.ns.iter().zip(results) {
        match r {
            Ok((rows, json)) => {
                lines.push(json);
                tasks.push((String::new(), Some(n), Ok(rows)));
            }
            Err(e) => tasks.push((String::new(), Some(n), Err(e))),
        }
    }
    write_jsonl(out_path(&cfg.out_dir, "equidist_profiles.jsonl")?, &lines)?;
    Ok(tasks)
}

fn equidist_complex(cfg: &ExperimentConfig, ctx: &RowCtx, f: &RationalMap, a: &RationalMap) -> Result<Tasks, CliError> {
    let gcfg = green_config(cfg)?;
    let mu = mu_sample(f, &cfg.seed_point, &sample_config(cfg))?;
    write_measure(out_path(&cfg.out_dir, "equidist_mu.jsonl")?, &mu)?;
    let pts = if cfg.points.is_empty() { default_test_points() } else { cfg.points.clone() };
    let bare: Vec<BerkPoint> = pts.iter().map(|p| p.1.clone()).collect();
    let label = format!("test_points({})", bare.len());
    let results: Vec<_> = cfg
        .ns
        .par_iter()
        .map(|&n| {
            let nu = nu_complex(f, a, n, cfg.budget)?;
            let c = compare_measures(&nu.measure, &mu, f, &bare, &gcfg, &DEFAULT_ANNULI)?;
            let mut rows = vec![
                ctx.row("", Some(n), "nu_atoms", nu.measure.len() as f64).note(format!("degree={} converged={}", nu.degree, nu.converged)),
                ctx.row("", Some(n), "nu_max_residual", nu.max_residual),
                ctx.row(&label, Some(n), "discrepancy_sup", c.sup).error(c.error).note(format!("used={} skipped={}", c.used, c.skipped)),
                ctx.row(&label, Some(n), "discrepancy_mean", c.mean).error(c.error),
            ];
            for b in &c.annuli {
                let band = format!("[{},{})", b.inner, b.outer);
                rows.push(ctx.row(&band, Some(n), "annulus_mass_nu", b.mass_nu));
                rows.push(ctx.row(&band, Some(n), "annulus_mass_mu", b.mass_mu));
            }
            Ok((rows, nu.measure))
        })
        .collect::<Vec<berkdyn::Result<_>>>();
    let mut tasks = Vec::new();
    for (&n, r) in cfg.ns.iter().zip(results) {
        match r {
            Ok((rows, nu)) => {
                write_measure(out_path(&cfg.out_dir, &format!("equidist_nu_n{n}.jsonl"))?, &nu)?;
                tasks.push((String::new(), Some(n), Ok(rows)));
            }
            Err(e) => tasks.push((String::new(), Some(n), Err(e))),
        }
    }
    Ok(tasks)
}

fn pairs(cfg: &ExperimentConfig, pts: &[(String, BerkPoint)]) -> Vec<(usize, u32)> {
    (0..pts.len()).flat_map(|i| cfg.ns.iter().map(move |&n| (i, n))).collect()
}

fn inv_power(d: usize, n: u32) -> Rational {
    Rational::from_integer((d as i64).into()).pow(-(n as i32))
}

fn condition3(cfg: &ExperimentConfig, ctx: &RowCtx) -> Result<Tasks, CliError> {
    non_archimedean(cfg, "condition3")?;
    let (f, a) = (&cfg.map, cfg.require_target()?);
    let pts = cfg.require_points()?;
    if let Some((s, _)) = pts.iter().find(|(_, p)| p.is_classical()) {
        return Err(CliError::Config(format!("condition3 needs disk points, got {s:?}")));
    }
    let polys = f.is_polynomial() && a.is_polynomial();
    let escapes: Vec<Option<Escape>> = pts
        .iter()
        .map(|(s, p)| {
            if !f.is_polynomial() {
                return None;
            }
            escape_test(f, p, cfg.escape_max_iter, cfg.escape_radius)
                .map_err(|e| warn!("escape test at {s}: {e}"))
                .ok()
        })
        .collect();
    let work = pairs(cfg, pts);
    let results: Vec<Task> = work
        .par_iter()
        .map(|&(i, n)| {
            let (label, s) = &pts[i];
            let v = condition3_sequence(f, a, s, &[n], cfg.budget)?.remove(0);
            let note = match escapes[i] {
                Some(Escape::Escaped(k)) => format!("A_inf (escaped at {k})"),
                _ => String::new(),
            };
            let mut rows = vec![ctx.log_row(label, Some(n), "condition3", &v, 0.0).note(note.clone())];
            if polys {
                let w = f.iterate(n, cfg.budget)?.as_polynomial()?.sub(&a.as_polynomial()?);
                let v = seminorm_at(&w, s)?.scale(&inv_power(f.degree(), n));
                rows.push(ctx.log_row(label, Some(n), "condition3_poly", &v, 0.0).note(note));
            }
            Ok(rows)
        })
        .collect();
    Ok(work.iter().zip(results).map(|(&(i, n), t)| (pts[i].0.clone(), Some(n), t)).collect())
}

fn green_rows(cfg: &ExperimentConfig, ctx: &RowCtx) -> Result<Tasks, CliError> {
    let f = &cfg.map;
    let pts = cfg.require_points()?;
    let gcfg = green_config(cfg)?;
    let scaled = cfg
        .scales
        .iter()
        .map(|(s, c)| Ok((s.clone(), c.clone(), f.with_lift_scale(c)?)))
        .collect::<berkdyn::Result<Vec<_>>>()?;
    let d = f.degree();
    let results: Vec<Task> = pts
        .par_iter()
        .map(|(label, s)| {
            let g = green(f, s, &gcfg)?;
            let mut rows = vec![ctx.log_row(label, None, "green", &g.value, g.error)];
            for (text, c, fc) in &scaled {
                let gc = green(fc, s, &gcfg)?;
                let diff = gc.value.sub(&g.value);
                let want = c.log_abs()?.scale(&Rational::new(1.into(), ((d - 1) as i64).into()));
                rows.push(ctx.log_row(label, None, "green_scale_diff", &diff, g.error + gc.error).note(format!("c={text}")));
                rows.push(ctx.log_row(label, None, "green_scale_expected", &want, 0.0).note(format!("c={text}")));
            }
            Ok(rows)
        })
        .collect();
    Ok(pts.iter().zip(results).map(|((l, _), t)| (l.clone(), None, t)).collect())
}

fn proximity_rows(cfg: &ExperimentConfig, ctx: &RowCtx, head: &mut Vec<Row>) -> Result<Tasks, CliError> {
    let (f, a) = (&cfg.map, cfg.require_target()?);
    let pts = cfg.require_points()?;
    let weights = green_config(cfg).and_then(|g| {
        let mu = mu_sample(f, &cfg.seed_point, &sample_config(cfg))?;
        Ok((v_f_estimate(f, &mu, &g)?, g))
    });
    let weights = match weights {
        Ok((v, g)) => {
            head.push(ctx.log_row("", None, "v_f", &v.v_f.value, v.v_f.error).note(format!("frostman_sup={}", v.frostman_sup)));
            Some((v.v_f.value, g))
        }
        Err(e) => {
            head.push(ctx.row("", None, "warning", f64::NAN).note(format!("weighted rows skipped: {e}")));
            None
        }
    };
    let nonarch = !cfg.backend.is_archimedean();
    let work = pairs(cfg, pts);
    let results: Vec<Task> = work
        .par_iter()
        .map(|&(i, n)| {
            let (label, s) = &pts[i];
            let fnm = f.iterate(n, cfg.budget)?;
            let mut rows = vec![ctx.log_row(label, Some(n), "proximity", &proximity(&fnm, a, s)?, 0.0)];
            if nonarch {
                rows.push(ctx.log_row(label, Some(n), "naive_proximity", &naive_pointwise_proximity(&fnm, a, s)?, 0.0));
            }
            if let Some((v, gcfg)) = &weights {
                let w = weighted_proximity(f, a, s, n, gcfg, v, cfg.budget)?;
                rows.push(ctx.log_row(label, Some(n), "weighted_proximity", &w.value, w.error));
            }
            Ok(rows)
        })
        .collect();
    Ok(work.iter().zip(results).map(|(&(i, n), t)| (pts[i].0.clone(), Some(n), t)).collect())
}

fn escape_rows(cfg: &ExperimentConfig, ctx: &RowCtx) -> Result<Tasks, CliError> {
    let f = &cfg.map;
    if !f.is_polynomial() {
        return Err(CliError::Config("escape needs a polynomial map".into()));
    }
    let pts = cfg.require_points()?;
    let results: Vec<Task> = pts
        .par_iter()
        .map(|(label, s)| {
            let row = match escape_test(f, s, cfg.escape_max_iter, cfg.escape_radius)? {
                Escape::Escaped(k) => ctx.row(label, Some(k), "escape", k as f64).note("escaped"),
                Escape::Bounded(k) => ctx.row(label, Some(k), "escape", k as f64).note("bounded"),
            };
            Ok(vec![row])
        })
        .collect();
    Ok(pts.iter().zip(results).map(|((l, _), t)| (l.clone(), None, t)).collect())
}

fn newton_rows(cfg: &ExperimentConfig, ctx: &RowCtx) -> Result<Tasks, CliError> {
    non_archimedean(cfg, "newton")?;
    let (f, a) = (&cfg.map, cfg.require_target()?);
    let results: Vec<Task> = cfg
        .ns
        .par_iter()
        .map(|&n| {
            let w = f.iterate(n, cfg.budget)?.wedge_form(a)?;
            let np = newton_polygon(w.poly())?;
            let at_inf = w.degree() - w.poly().degree().unwrap_or(0);
            let mut rows = vec![
                ctx.row("0", Some(n), "root_multiplicity", np.zero_multiplicity as f64),
                ctx.row("inf", Some(n), "root_multiplicity", at_inf as f64),
            ];
            for (v, len) in np.valuations() {
                rows.push(ctx.row("", Some(n), "root_valuation", mass_f64(&v)).exact(v.to_string()).note(format!("multiplicity={len}")));
            }
            Ok(rows)
        })
        .collect();
    Ok(cfg.ns.iter().zip(results).map(|(&n, t)| (String::new(), Some(n), t)).collect())
}
