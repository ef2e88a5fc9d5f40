//! Growth rates, Poincaré series, free products and entropy targets.

use std::fmt::Write as _;

use minent_core::entropy::{
    critical_exponent, ent_upper_bound_bishop, free_product_exponent_check, minent_target, poincare_partial,
    FreeGroup, LengthOracle, Presentation, DEFAULT_BUDGET,
};
use serde::Deserialize;

use super::thin;
use crate::config::{real, real_opt, reals, ExperimentConfig};
use crate::error::{lab, CliError};
use crate::output::{num, Outcome};

/// A group with a length function, described in a config table.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupSpec {
    /// One of `free`, `z2`, `trivial`, `hyperbolic`, `presented`.
    group: String,
    rank: Option<usize>,
    #[serde(default, deserialize_with = "crate::config::reals_opt")]
    lengths: Option<Vec<f64>>,
    dimension: Option<u32>,
    generators: Option<usize>,
    #[serde(default)]
    rules: Vec<String>,
    #[serde(default, deserialize_with = "real_opt")]
    rescale: Option<f64>,
}

impl GroupSpec {
    fn base_oracle(&self) -> Result<LengthOracle, CliError> {
        let need = |what: &str| CliError::Config(format!("group {:?} needs `{what}`", self.group));
        Ok(match self.group.as_str() {
            "trivial" => LengthOracle::Trivial,
            "z2" => LengthOracle::Presented(Presentation::z2()),
            "free" => match (&self.lengths, self.rank) {
                (Some(l), _) => LengthOracle::Free(FreeGroup::new(l.clone()).map_err(lab("free group"))?),
                (None, Some(r)) => LengthOracle::Free(FreeGroup::unit(r)),
                (None, None) => return Err(need("rank` or `lengths")),
            },
            "hyperbolic" => LengthOracle::HyperbolicGrowth { dimension: self.dimension.ok_or_else(|| need("dimension"))? },
            "presented" => {
                let rules: Vec<&str> = self.rules.iter().map(String::as_str).collect();
                let n = self.generators.ok_or_else(|| need("generators"))?;
                LengthOracle::Presented(Presentation::parse(n, &rules).map_err(lab("presentation"))?)
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown group {other:?}; expected free, z2, trivial, hyperbolic or presented"
                )))
            }
        })
    }

    fn oracle(&self) -> Result<LengthOracle, CliError> {
        let base = self.base_oracle()?;
        match self.rescale {
            Some(f) => base.rescaled(f).map_err(lab("rescaling")),
            None => Ok(base),
        }
    }

    fn describe(&self) -> String {
        let mut s = self.group.clone();
        if let Some(r) = self.rank {
            let _ = write!(s, " rank {r}");
        }
        if let Some(l) = &self.lengths {
            let _ = write!(s, " lengths {l:?}");
        }
        if let Some(d) = self.dimension {
            let _ = write!(s, " dimension {d}");
        }
        if let Some(f) = self.rescale {
            let _ = write!(s, " rescaled by {f}");
        }
        s
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PoincareParams {
    group: GroupSpec,
    #[serde(deserialize_with = "reals")]
    s_values: Vec<f64>,
    #[serde(deserialize_with = "real")]
    cutoff: f64,
    #[serde(default, deserialize_with = "real_opt")]
    r_max: Option<f64>,
    #[serde(default = "default_tol", deserialize_with = "real")]
    tol: f64,
    #[serde(default, deserialize_with = "real_opt")]
    expected_exponent: Option<f64>,
    #[serde(default = "default_tol", deserialize_with = "real")]
    exponent_tolerance: f64,
}

fn default_tol() -> f64 {
    1e-3
}

pub(super) fn poincare(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: PoincareParams = cfg.params()?;
    let grid = cfg.grid_or(200)?;
    let oracle = p.group.oracle()?;
    let r_max = p.r_max.unwrap_or(p.cutoff);
    let est = critical_exponent(&oracle, p.tol, r_max).map_err(lab("critical exponent"))?;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("group: {}", p.group.describe()));
    out.line(format!(
        "critical exponent {:.12} from {} samples on [{}, {}]; stability {:.3e} ({})",
        est.slope,
        est.samples,
        est.window.0,
        est.window.1,
        est.stability,
        if est.converged { "converged" } else { "not converged" }
    ));
    if let Some(e) = p.expected_exponent {
        let err = (est.slope - e).abs();
        out.check("critical exponent", err <= p.exponent_tolerance, format!("|{:.12} - {e}| = {err:.3e}", est.slope));
    }
    if let Some(f) = p.group.rescale {
        let base = p.group.base_oracle()?;
        let unscaled = critical_exponent(&base, p.tol, r_max / f).map_err(lab("critical exponent"))?;
        let rel = (est.slope * f - unscaled.slope).abs() / unscaled.slope.abs().max(f64::MIN_POSITIVE);
        out.line(format!("unscaled exponent {:.12}", unscaled.slope));
        out.check("rescaling", rel <= 1e-6, format!("relative error {rel:.3e}"));
    }

    let spectrum = oracle.spectrum(r_max).map_err(lab("length spectrum"))?;
    let mut growth = String::from("R,count,ln_count\n");
    let mut series = Vec::new();
    for i in 1..=grid {
        let r = r_max * i as f64 / grid as f64;
        let n = match &spectrum {
            Some(sp) => sp.count(r),
            None => oracle.count(r).map_err(lab("growth"))?,
        };
        let _ = writeln!(growth, "{},{},{}", num(r), num(n), num(n.ln()));
        series.push((r, n.ln()));
    }
    out.table("growth", growth);
    out.plot("growth", "R", "ln N(R)", thin(series, 2000));

    let mut ps = String::from("s,cutoff,partial_sum\n");
    for &s in &p.s_values {
        let v = poincare_partial(&oracle, s, p.cutoff).map_err(lab("poincare series"))?;
        out.line(format!("s = {s}: partial sum to {} = {:.12e}", p.cutoff, v));
        let _ = writeln!(ps, "{},{},{}", num(s), num(p.cutoff), num(v));
    }
    out.table("poincare", ps);
    out.summary("exponent", est.slope);
    out.summary("stability", est.stability);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FreeProductParams {
    factor1: GroupSpec,
    factor2: GroupSpec,
    #[serde(deserialize_with = "real")]
    l: f64,
    #[serde(deserialize_with = "reals")]
    s_values: Vec<f64>,
    #[serde(deserialize_with = "real")]
    cutoff: f64,
    #[serde(default = "default_budget")]
    budget: usize,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

pub(super) fn freeproduct(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: FreeProductParams = cfg.params()?;
    let f1 = p.factor1.oracle()?;
    let f2 = p.factor2.oracle()?;
    let r = free_product_exponent_check(&f1, &f2, p.l, &p.s_values, p.cutoff, p.budget)
        .map_err(lab("free product"))?;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("factors: {} * {}", p.factor1.describe(), p.factor2.describe()));
    out.line(format!(
        "L = {}, cutoff = {}, {} elements, {} complete syllable pairs{}",
        r.l,
        r.cutoff,
        r.elements,
        r.complete_pairs,
        if r.truncated { " (truncated by budget)" } else { "" }
    ));
    out.line(format!("factor exponents {:.6}, {:.6}", r.factor_exponents.0, r.factor_exponents.1));
    if r.degenerate {
        out.line("one factor is trivial; the product is the other factor");
    }
    for row in &r.rows {
        let bound = match row.bound {
            Some(b) => format!(
                "q = {:.6e}, bound = {}, threshold L = {:.12}",
                b.q,
                b.bound.map_or("none (q >= 1)".into(), |v| format!("{v:.12}")),
                b.threshold_l
            ),
            None => "no bound".into(),
        };
        out.line(format!(
            "s = {}: partial sum {:.12}, P1* = {:.12}, P2* = {:.12}, {bound}, converged = {}",
            row.s, row.partial_sum, row.p1_star, row.p2_star, row.converged
        ));
    }
    out.check("syllable lengths match the tube model", r.lengths_match_model, format!("{} words", r.elements));
    out.check(
        "partial sums within bound",
        r.passed(),
        format!("{} of {} rows applicable", r.rows.iter().filter(|x| x.applicable).count(), r.rows.len()),
    );
    out.table("freeproduct", r.to_csv());
    out.plot("partial_sums", "s", "partial sum", r.rows.iter().map(|x| (x.s, x.partial_sum)).collect());
    if let Some(first) = r.rows.first() {
        out.summary("converged", first.converged as u8 as f64);
        out.summary("partial_sum", first.partial_sum);
        if let Some(b) = first.bound {
            out.summary("q", b.q);
            out.summary("threshold_L", b.threshold_l);
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MinentParams {
    #[serde(deserialize_with = "reals")]
    volumes: Vec<f64>,
    #[serde(default, deserialize_with = "real")]
    delta: f64,
    #[serde(default = "three")]
    n: u32,
    #[serde(default, deserialize_with = "real_opt")]
    expected: Option<f64>,
}

fn three() -> u32 {
    3
}

pub(super) fn minent(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: MinentParams = cfg.params()?;
    let target = minent_target(&p.volumes).map_err(lab("minimal entropy target"))?;
    let bishop = ent_upper_bound_bishop(p.delta, p.n).map_err(lab("entropy bound"))?;
    let total: f64 = p.volumes.iter().sum();
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("hyperbolic volumes {:?}, total {total:.15}", p.volumes));
    out.line(format!("minimal entropy target 2 (sum Vol)^(1/3) = {target:.15}"));
    out.line(format!("target^3 = {:.15}, 8 sum Vol = {:.15}", target.powi(3), 8.0 * total));
    out.line(format!("entropy bound (n - 1)(1 + 2 delta) at delta = {}, n = {}: {bishop:.15}", p.delta, p.n));
    let cube_err = (target.powi(3) - 8.0 * total).abs() / (8.0 * total).max(1.0);
    out.check("cube identity", cube_err <= 1e-12, format!("relative error {cube_err:.3e}"));
    if let Some(e) = p.expected {
        let err = (target - e).abs();
        out.check("target value", err <= 1e-9 * e.abs().max(1.0), format!("|{target:.15} - {e}| = {err:.3e}"));
    }
    out.table(
        "minent",
        format!(
            "total_volume,target,bishop_bound,delta,n\n{},{},{},{},{}\n",
            num(total),
            num(target),
            num(bishop),
            num(p.delta),
            p.n
        ),
    );
    out.summary("target", target);
    out.summary("bishop_bound", bishop);
    Ok(out)
}
