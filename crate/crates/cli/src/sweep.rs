//! Repeat an experiment over a list of values of one parameter.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::{num, write_atomic, Check, Outcome};

/// Per-value outcomes plus checks on the trend across values.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub param: String,
    pub runs: Vec<(String, Outcome)>,
    pub checks: Vec<Check>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.runs.iter().all(|(_, o)| o.passed()) && self.checks.iter().all(|c| c.passed)
    }

    /// Names of failing checks, per run and across runs.
    pub fn failures(&self) -> Vec<String> {
        let mut f: Vec<String> = self
            .runs
            .iter()
            .flat_map(|(v, o)| o.failures().into_iter().map(move |c| format!("{}={v}: {}: {}", self.param, c.name, c.detail)))
            .collect();
        f.extend(self.checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)));
        f
    }

    pub fn report_text(&self) -> String {
        let mut s = String::new();
        let kind = self.runs.first().map_or("?".to_string(), |r| r.1.kind.to_string());
        let _ = writeln!(s, "sweep of {kind} over {} = [{}]", self.param, self.runs.iter().map(|r| r.0.as_str()).collect::<Vec<_>>().join(", "));
        for (v, o) in &self.runs {
            let summary: Vec<String> = o.summary.iter().map(|(k, x)| format!("{k} = {x:.9e}")).collect();
            let _ = writeln!(
                s,
                "  {}={v}: {} ({})",
                self.param,
                if o.passed() { "pass" } else { "FAIL" },
                summary.join(", ")
            );
        }
        let _ = writeln!(s, "checks:");
        for (v, o) in &self.runs {
            for c in &o.checks {
                let _ = writeln!(s, "  [{}] {}={v}: {}: {}", if c.passed { "PASS" } else { "FAIL" }, self.param, c.name, c.detail);
            }
        }
        for c in &self.checks {
            let _ = writeln!(s, "  [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "status: {}", if self.passed() { "all checks passed" } else { "check failure" });
        s
    }
}

/// Run `cfg` once per value of `param`, in parallel. Each run writes under
/// `<out>/runs/<param>=<value>/`; merged tables go to `<out>/data/` and the per-run
/// summaries to `<out>/sweep.csv`.
pub fn sweep(cfg: &ExperimentConfig, param: &str, values: &[String]) -> Result<SweepOutcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Config(format!("sweep of {param} needs at least one value")));
    }
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = cfg.clone();
        c.set_param(param, v)?;
        c.out = cfg.out.join("runs").join(format!("{param}={v}"));
        configs.push(c);
    }
    let results: Vec<Result<Outcome, CliError>> = configs.par_iter().map(crate::run).collect();
    let mut runs = Vec::with_capacity(values.len());
    for (v, r) in values.iter().zip(results) {
        runs.push((v.clone(), r?));
    }

    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    for (v, o) in &runs {
        for t in &o.tables {
            let mut lines = t.csv.lines();
            let header = lines.next().unwrap_or("");
            let entry = merged.entry(t.name.clone()).or_insert_with(|| format!("{param},{header}\n"));
            for l in lines {
                let _ = writeln!(entry, "{v},{l}");
            }
        }
    }
    for (name, csv) in &merged {
        write_atomic(&cfg.out.join("data").join(format!("{name}.csv")), csv)?;
    }
    let mut keys: Vec<&str> = Vec::new();
    for (_, o) in &runs {
        for (k, _) in &o.summary {
            if !keys.contains(&k.as_str()) {
                keys.push(k);
            }
        }
    }
    let mut summary = format!("{param},passed{}\n", keys.iter().map(|k| format!(",{k}")).collect::<String>());
    for (v, o) in &runs {
        let _ = write!(summary, "{v},{}", o.passed());
        for k in &keys {
            let x = o.summary.iter().find(|(kk, _)| kk == k).map_or(f64::NAN, |e| e.1);
            let _ = write!(summary, ",{}", num(x));
        }
        summary.push('\n');
    }
    write_atomic(&cfg.out.join("sweep.csv"), &summary)?;

    let checks = trend_checks(cfg.kind, param, &runs)?;
    let out = SweepOutcome { param: param.to_string(), runs, checks };
    write_atomic(&cfg.out.join("report.txt"), &out.report_text())?;
    Ok(out)
}

fn numeric(param: &str, runs: &[(String, Outcome)], key: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut pts = Vec::new();
    for (v, o) in runs {
        let x: f64 = v
            .parse()
            .map_err(|_| CliError::Config(format!("{param} value {v:?} is not numeric")))?;
        let y = o.summary.iter().find(|(k, _)| k == key).map_or(f64::NAN, |e| e.1);
        pts.push((x, y));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pts)
}

/// Checks on how results move across the swept values.
fn trend_checks(kind: Kind, param: &str, runs: &[(String, Outcome)]) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    match (kind, param) {
        (Kind::Flatten, "delta") => {
            let pts = numeric(param, runs, "ln_abs_difference")?;
            // Sorted by increasing delta, so the difference must strictly increase.
            let monotone = pts.windows(2).all(|w| w[0].1 < w[1].1);
            let detail = pts.iter().rev().map(|(d, y)| format!("{d}: {y:.6}")).collect::<Vec<_>>().join(", ");
            checks.push(Check {
                name: "volume difference shrinks with delta".into(),
                passed: monotone,
                detail: format!("ln|difference| by delta: {detail}"),
            });
            let bounded = numeric(param, runs, "within_bound")?.iter().all(|p| p.1 == 1.0);
            checks.push(Check {
                name: "every difference within its bound".into(),
                passed: bounded,
                detail: format!("{} runs", runs.len()),
            });
        }
        (Kind::Freeproduct, "l") => {
            let pts = numeric(param, runs, "converged")?;
            let flips = pts.windows(2).filter(|w| w[0].1 != w[1].1).count();
            let detail = pts.iter().map(|(l, c)| format!("{l}: {}", *c == 1.0)).collect::<Vec<_>>().join(", ");
            checks.push(Check {
                name: "converged flag flips once".into(),
                passed: flips == 1,
                detail: format!("{flips} flips; {detail}"),
            });
        }
        _ => {}
    }
    Ok(checks)
}
