//! Barycenters and the comparison inequality on wedge spaces.

use std::fmt::Write as _;

use minent_core::cat0::{
    barycenter, barycenter_from, comparison_sides, fixtures, Hub, Leaf, PointRef, PointedMeasure, WedgeSpace,
    CERTIFICATE_SAMPLES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::config::{real, real_rows, reals_opt, ExperimentConfig};
use crate::error::{lab, CliError};
use crate::output::{num, Outcome};

/// Certificate threshold for uniqueness of the barycenter.
const CERTIFICATE_SLACK: f64 = 1e-7;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HubRows(#[serde(deserialize_with = "real_rows")] Vec<Vec<f64>>);

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BarycenterParams {
    /// Named fixture; alternative to `leaves` and `hubs`.
    space: Option<String>,
    /// `euclidean`, `hyperbolic`, `ray` or `segment:<length>`.
    leaves: Option<Vec<String>>,
    /// Each hub is a list of `[leaf, x, y]` incidences.
    #[serde(default)]
    hubs: Vec<HubRows>,
    /// Rows `[leaf, x, y, weight]`.
    #[serde(default, deserialize_with = "real_rows")]
    masses: Vec<Vec<f64>>,
    /// CSV file of masses, relative to the config file.
    measure_csv: Option<String>,
    #[serde(default = "default_tol", deserialize_with = "real")]
    tol: f64,
    #[serde(default = "five")]
    restarts: usize,
    #[serde(default = "one", deserialize_with = "real")]
    restart_scale: f64,
    /// Expected `[leaf, x, y]`.
    #[serde(default, deserialize_with = "reals_opt")]
    expected: Option<Vec<f64>>,
}

fn default_tol() -> f64 {
    1e-9
}

fn five() -> usize {
    5
}

fn one() -> f64 {
    1.0
}

fn leaf_index(x: f64) -> Result<usize, CliError> {
    if x >= 0.0 && x.fract() == 0.0 && x < 1e9 {
        Ok(x as usize)
    } else {
        Err(CliError::Config(format!("leaf index must be a nonnegative integer, got {x}")))
    }
}

fn parse_leaf(s: &str) -> Result<Leaf, CliError> {
    Ok(match s.trim() {
        "euclidean" => Leaf::Euclidean,
        "hyperbolic" => Leaf::Hyperbolic,
        "ray" => Leaf::Ray { length: None },
        other => match other.strip_prefix("segment:").map(str::parse::<f64>) {
            Some(Ok(len)) => Leaf::Ray { length: Some(len) },
            _ => {
                return Err(CliError::Config(format!(
                    "unknown leaf {other:?}; expected euclidean, hyperbolic, ray or segment:<length>"
                )))
            }
        },
    })
}

fn build_space(p: &BarycenterParams) -> Result<(String, WedgeSpace), CliError> {
    match (&p.space, &p.leaves) {
        (Some(name), None) => Ok((name.clone(), fixtures::by_name(name).map_err(lab("wedge fixture"))?)),
        (None, Some(leaves)) => {
            let leaves = leaves.iter().map(|s| parse_leaf(s)).collect::<Result<Vec<_>, _>>()?;
            let mut hubs = Vec::new();
            for h in &p.hubs {
                let mut incidences = Vec::new();
                for row in &h.0 {
                    match row.as_slice() {
                        [l, x, y] => incidences.push((leaf_index(*l)?, [*x, *y])),
                        _ => return Err(CliError::Config("hub incidences are [leaf, x, y]".into())),
                    }
                }
                hubs.push(Hub { incidences });
            }
            Ok(("custom".into(), WedgeSpace::new(leaves, hubs).map_err(lab("wedge space"))?))
        }
        _ => Err(CliError::Config("give exactly one of `space` and `leaves`".into())),
    }
}

fn build_measure(p: &BarycenterParams, cfg: &ExperimentConfig) -> Result<PointedMeasure, CliError> {
    match (&p.measure_csv, p.masses.is_empty()) {
        (Some(path), true) => {
            let full = cfg.base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            PointedMeasure::from_csv(&text).map_err(lab(&format!("measure file {}", full.display())))
        }
        (None, false) => {
            let mut masses = Vec::new();
            for row in &p.masses {
                match row.as_slice() {
                    [l, x, y, w] => masses.push((PointRef::new(leaf_index(*l)?, *x, *y), *w)),
                    _ => return Err(CliError::Config("masses are [leaf, x, y, weight]".into())),
                }
            }
            PointedMeasure::new(masses).map_err(lab("measure"))
        }
        _ => Err(CliError::Config("give exactly one of `masses` and `measure_csv`".into())),
    }
}

pub(super) fn barycenter_run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: BarycenterParams = cfg.params()?;
    let (name, space) = build_space(&p)?;
    let mu = build_measure(&p, cfg)?;
    let b = barycenter(&space, &mu, p.tol).map_err(lab("barycenter"))?;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("space: {name} ({} leaves, {} hubs), {} masses", space.leaves().len(), space.hubs().len(), mu.masses.len()));
    out.line(format!("barycenter {}", b.report()));
    out.check(
        "uniqueness certificate",
        b.certificate <= CERTIFICATE_SLACK,
        format!("{:.3e} <= {CERTIFICATE_SLACK:e} over {} validation points", b.certificate, CERTIFICATE_SAMPLES),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("run,leaf,x,y,value,certificate,distance_to_first\n");
    let _ = writeln!(csv, "0,{},{},{},{},{},0", b.point.leaf, num(b.point.coords[0]), num(b.point.coords[1]), num(b.value), num(b.certificate));
    let mut spread: f64 = 0.0;
    for k in 1..=p.restarts {
        let scale = p.restart_scale * rng.gen_range(0.1..1.0);
        let start = space.random_point(&mut rng, scale);
        let r = barycenter_from(&space, &mu, p.tol, &start).map_err(lab("barycenter restart"))?;
        let d = space.distance(&b.point, &r.point).map_err(lab("distance"))?;
        spread = spread.max(d);
        let _ = writeln!(
            csv,
            "{k},{},{},{},{},{},{}",
            r.point.leaf,
            num(r.point.coords[0]),
            num(r.point.coords[1]),
            num(r.value),
            num(r.certificate),
            num(d)
        );
    }
    if p.restarts > 0 {
        out.check("restart agreement", spread <= 10.0 * p.tol, format!("max distance {spread:.3e} over {} restarts", p.restarts));
    }

    if space.leaves() == [Leaf::Euclidean] {
        let total = mu.total_mass();
        let mean = mu.masses.iter().fold([0.0, 0.0], |acc, (z, w)| {
            [acc[0] + w * z.coords[0] / total, acc[1] + w * z.coords[1] / total]
        });
        let d = space.distance(&b.point, &PointRef::new(0, mean[0], mean[1])).map_err(lab("distance"))?;
        out.check("weighted mean", d <= 1e-9, format!("distance {d:.3e} to ({:.12}, {:.12})", mean[0], mean[1]));
    }
    if let Some(e) = &p.expected {
        let [l, x, y] = e.as_slice() else {
            return Err(CliError::Config("expected is [leaf, x, y]".into()));
        };
        let target = PointRef::new(leaf_index(*l)?, *x, *y);
        let d = space.distance(&b.point, &target).map_err(lab("expected point"))?;
        out.check("expected point", d <= p.tol, format!("distance {d:.3e}"));
    }
    out.table("barycenter", csv);
    out.table("measure", mu.to_csv());
    out.summary("value", b.value);
    out.summary("certificate", b.certificate);
    out.summary("restart_spread", spread);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComparisonParams {
    fixtures: Option<Vec<String>>,
    #[serde(default = "ten_thousand")]
    samples: usize,
    #[serde(default = "two", deserialize_with = "real")]
    scale: f64,
}

fn ten_thousand() -> usize {
    10_000
}

fn two() -> f64 {
    2.0
}

pub(super) fn comparison(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: ComparisonParams = cfg.params()?;
    let names: Vec<String> = p.fixtures.unwrap_or_else(|| fixtures::NAMES.iter().map(|s| s.to_string()).collect());
    let mut out = Outcome::new(cfg.kind);
    let mut csv = String::from("fixture,samples,violations,max_excess,max_relative_gap\n");
    for name in &names {
        let space = fixtures::by_name(name).map_err(lab("wedge fixture"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (mut violations, mut max_excess, mut max_rel) = (0usize, f64::NEG_INFINITY, 0.0f64);
        for _ in 0..p.samples {
            let a = space.random_point(&mut rng, p.scale);
            let b = space.random_point(&mut rng, p.scale);
            let c = space.random_point(&mut rng, p.scale);
            let t = rng.gen::<f64>();
            let s = comparison_sides(&space, &a, &b, &c, t).map_err(lab("comparison"))?;
            if !s.holds {
                violations += 1;
            }
            max_excess = max_excess.max(s.lhs - s.rhs);
            max_rel = max_rel.max((s.lhs - s.rhs).abs() / s.rhs.max(1.0));
        }
        out.line(format!(
            "{name}: {} samples, {violations} violations, max lhs - rhs = {max_excess:.3e}, max relative gap {max_rel:.3e}",
            p.samples
        ));
        out.check(format!("comparison on {name}"), violations == 0, format!("max lhs - rhs = {max_excess:.3e}"));
        if name == "euclidean" {
            out.check("equality in the plane", max_rel <= 1e-12, format!("max relative gap {max_rel:.3e}"));
        }
        let _ = writeln!(csv, "{name},{},{violations},{},{}", p.samples, num(max_excess), num(max_rel));
    }
    out.table("comparison", csv);
    Ok(out)
}
