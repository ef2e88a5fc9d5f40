//! The algebraic spectrum bound, Jacobi field estimates and Jacobian bounds.

use std::fmt::Write as _;

use minent_core::jacobian::{
    algebraic_bound, algebraic_max, ii_lower_bound, jacobi_ii, jacobian_bound, jacobian_sweep, phi_of_spectrum,
    radius_for_eps, random_contract_schedule, CurvatureSchedule, SpectrumPoint, SWEEP_CSV_HEADER,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::thin;
use crate::config::{real, reals, ExperimentConfig};
use crate::error::{lab, CliError};
use crate::output::{num, Outcome};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainParams {
    ns: Vec<usize>,
    #[serde(deserialize_with = "reals")]
    cs: Vec<f64>,
    #[serde(deserialize_with = "reals")]
    eps: Vec<f64>,
    #[serde(default = "hundred")]
    draws: usize,
}

fn hundred() -> usize {
    100
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraicParams {
    n: Option<usize>,
    ns: Option<Vec<usize>>,
    #[serde(default = "samples_default")]
    samples: usize,
    chain: Option<ChainParams>,
}

fn samples_default() -> usize {
    100_000
}

pub(super) fn algebraic(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: AlgebraicParams = cfg.params()?;
    let ns = match (p.n, p.ns) {
        (Some(n), None) => vec![n],
        (None, Some(ns)) if !ns.is_empty() => ns,
        _ => return Err(CliError::Config("give exactly one of `n` and a nonempty `ns`".into())),
    };
    let mut out = Outcome::new(cfg.kind);
    let mut csv = String::from("n,samples,max_found,best_sample,bound,distance_to_uniform\n");
    for &n in &ns {
        let m = algebraic_max(n, p.samples, cfg.seed).map_err(lab("simplex search"))?;
        let at_uniform = m.distance_to_uniform() <= 1e-4;
        out.line(format!(
            "n = {n}: max {:.6} at {}; bound n^(n/2)/(n-1)^n = {:.15}; best raw sample {:.15}; polished {:.15}",
            m.max_found,
            if at_uniform { "uniform".to_string() } else { format!("{:?}", m.argmax) },
            m.bound,
            m.best_sample,
            m.max_found
        ));
        out.check(format!("n = {n} never exceeds the bound"), m.max_found <= m.bound + 1e-9, format!("excess {:.3e}", m.max_found - m.bound));
        out.check(format!("n = {n} maximum at uniform"), at_uniform, format!("distance {:.3e}", m.distance_to_uniform()));
        let u = phi_of_spectrum(&SpectrumPoint::uniform(n));
        let err = (u - algebraic_bound(n)).abs();
        out.check(format!("n = {n} uniform attains the bound"), err <= 1e-12, format!("|error| = {err:.3e}"));
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            p.samples,
            num(m.max_found),
            num(m.best_sample),
            num(m.bound),
            num(m.distance_to_uniform())
        );
        out.summary(&format!("max_n{n}"), m.max_found);
    }
    out.table("algebraic", csv);
    if let Some(c) = p.chain {
        let rows = jacobian_sweep(cfg.seed, &c.ns, &c.cs, &c.eps, c.draws).map_err(lab("jacobian sweep"))?;
        let failed = rows.iter().filter(|r| !r.ok).count();
        let mut chain = format!("{SWEEP_CSV_HEADER}\n");
        for r in &rows {
            chain.push_str(&r.to_csv_row());
            chain.push('\n');
        }
        for &n in &c.ns {
            for &cc in &c.cs {
                for &e in &c.eps {
                    let b = jacobian_bound(cc, n, e).map_err(lab("jacobian bound"))?;
                    out.line(format!("jacobian bound at n = {n}, c = {cc}, eps = {e}: {b:.12e}"));
                }
            }
        }
        out.check("jacobian chain", failed == 0, format!("{failed} of {} draws exceed the bound", rows.len()));
        out.table("chain", chain);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleParams {
    #[serde(default, deserialize_with = "reals")]
    breakpoints: Vec<f64>,
    #[serde(deserialize_with = "reals")]
    kappas: Vec<f64>,
    #[serde(deserialize_with = "real")]
    ell: f64,
    #[serde(default, deserialize_with = "real")]
    j0: f64,
    #[serde(default = "one", deserialize_with = "real")]
    j0p: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JacobiParams {
    #[serde(default = "thousand")]
    random_schedules: usize,
    schedule: Option<ScheduleParams>,
    #[serde(default = "eps_default", deserialize_with = "reals")]
    eps_values: Vec<f64>,
    #[serde(default = "coth_default", deserialize_with = "reals")]
    coth_times: Vec<f64>,
}

fn thousand() -> usize {
    1000
}

fn eps_default() -> Vec<f64> {
    vec![0.5, 0.1, 0.02]
}

fn coth_default() -> Vec<f64> {
    (1..=100).map(|i| 0.1 * i as f64).collect()
}

pub(super) fn jacobi(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: JacobiParams = cfg.params()?;
    let mut out = Outcome::new(cfg.kind);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut csv = String::from("index,R,ell,jp0,ii,bound,margin\n");
    let (mut worst, mut worst_i) = (f64::INFINITY, 0);
    for i in 0..p.random_schedules {
        let (s, r, jp) = random_contract_schedule(&mut rng).map_err(lab("random schedule"))?;
        let ii = jacobi_ii(&s, 0.0, jp).map_err(lab("jacobi field"))?.ii_at_ell;
        let margin = ii - ii_lower_bound(r);
        if margin < worst {
            (worst, worst_i) = (margin, i);
        }
        let _ = writeln!(csv, "{i},{},{},{},{},{},{}", num(r), num(s.ell), num(jp), num(ii), num(ii_lower_bound(r)), num(margin));
    }
    if p.random_schedules > 0 {
        out.line(format!("{} random schedules; smallest II - (1 - 2e^(-2R)) = {worst:.6e} (schedule {worst_i})", p.random_schedules));
        out.check("second fundamental form bound", worst >= -1e-8, format!("min margin {worst:.3e}"));
    }
    out.table("random_schedules", csv);

    let mut coth = String::from("t,ii,coth,bound,error\n");
    let mut coth_err: f64 = 0.0;
    let mut above = true;
    for &t in &p.coth_times {
        let s = CurvatureSchedule::constant(-1.0, t).map_err(lab("schedule"))?;
        let ii = jacobi_ii(&s, 0.0, 1.0).map_err(lab("jacobi field"))?.ii_at_ell;
        let c = 1.0 / t.tanh();
        coth_err = coth_err.max((ii - c).abs());
        above &= c >= ii_lower_bound(t);
        let _ = writeln!(coth, "{},{},{},{},{}", num(t), num(ii), num(c), num(ii_lower_bound(t)), num((ii - c).abs()));
    }
    if !p.coth_times.is_empty() {
        out.check("hyperbolic field matches coth", coth_err <= 1e-8, format!("max |II - coth t| = {coth_err:.3e}"));
        out.check("coth above the bound", above, format!("{} times", p.coth_times.len()));
    }
    out.table("coth", coth);

    let mut eps_csv = String::from("eps,R_eps,reconstructed\n");
    for &e in &p.eps_values {
        let r = radius_for_eps(e).map_err(lab("radius for eps"))?;
        let back = 2.0 * (-2.0 * r).exp();
        let err = (back - e).abs();
        out.line(format!("eps = {e}: R_eps = {r:.15}, 2e^(-2R_eps) = {back:.17}"));
        out.check(format!("radius for eps = {e}"), err <= 1e-14, format!("|error| = {err:.3e}"));
        let _ = writeln!(eps_csv, "{},{},{}", num(e), num(r), num(back));
    }
    out.table("radius_for_eps", eps_csv);

    if let Some(sp) = p.schedule {
        let s = CurvatureSchedule::new(sp.breakpoints, sp.kappas, sp.ell).map_err(lab("schedule"))?;
        let prof = jacobi_ii(&s, sp.j0, sp.j0p).map_err(lab("jacobi field"))?;
        out.line(format!(
            "explicit schedule: II(ell) = {:.15}, {} accepted and {} rejected steps",
            prof.ii_at_ell, prof.stats.accepted, prof.stats.rejected
        ));
        match s.hyperbolic_tail() {
            Some(r) if sp.j0 == 0.0 && sp.j0p > 0.0 => {
                let b = ii_lower_bound(r);
                out.line(format!("hyperbolic tail R = {r:.12}, bound {b:.15}"));
                out.check("explicit schedule bound", prof.ii_at_ell >= b - 1e-8, format!("{:.12} >= {b:.12}", prof.ii_at_ell));
            }
            _ => out.line("explicit schedule is outside the bound's hypotheses"),
        }
        let mut pcsv = String::from("t,J,dJ,II\n");
        for x in &prof.samples {
            let _ = writeln!(pcsv, "{},{},{},{}", num(x.t), num(x.j), num(x.jp), x.ii.map_or("nan".into(), num));
        }
        out.table("profile", pcsv);
        out.plot("profile", "t", "J", thin(prof.samples.iter().map(|x| (x.t, x.j)).collect(), 2000));
        out.summary("ii_at_ell", prof.ii_at_ell);
    }
    out.summary("min_margin", worst);
    Ok(out)
}
