//! Cusp caps, conformal changes, flattening, tubes and Seifert compatibility.

use std::fmt::Write as _;

use minent_core::profiles::{cusp_cap_profile, ode_min_location, ode_min_value, ode_profile, CapParameters, Side};
use minent_core::surgery::{
    conformal_change, hyperbolic_flatten, leeb_compatibility, orbifold_euler, seifert_cusp_cap,
    seifert_zeta_bar, tube_metric, ConformalCusp, SeifertFibrationData, TorusCuspSpec, TubeSpec,
};
use minent_core::warped::{curvature_scan_with_tolerance, CurvatureReport, WarpedMetric};
use serde::Deserialize;

use super::thin;
use crate::config::{real, real_rows, reals, ExperimentConfig};
use crate::error::{lab, CliError};
use crate::output::{num, Outcome};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CapParams {
    #[serde(deserialize_with = "real")]
    delta: f64,
    #[serde(default = "one", deserialize_with = "real")]
    ell: f64,
}

fn one() -> f64 {
    1.0
}

/// Locate the minimum of the ODE profile by bisection on the sign of its derivative.
fn locate_ode_minimum(ell: f64, delta: f64) -> Result<f64, CliError> {
    let p = ode_profile(ell, delta).map_err(lab("ode profile"))?;
    let d1 = |t: f64| p.eval1(t).map_err(lab("ode profile"));
    let (mut lo, mut hi) = (0.0, 1.0);
    while d1(hi)? < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(CliError::Runtime {
                name: "ode minimum".into(),
                source: minent_core::LabError::Degenerate("derivative never turns positive".into()),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d1(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(super) fn cap(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: CapParams = cfg.params()?;
    let grid = cfg.grid_or(10_000)?;
    let (profile, c) = cusp_cap_profile(p.ell, p.delta).map_err(lab("cusp cap"))?;
    let mut out = Outcome::new(cfg.kind);
    let (lo_b, hi_b) = CapParameters::ell_prime_bounds(p.ell, p.delta);
    out.line(format!("delta = {}, ell = {}", p.delta, p.ell));
    out.line(format!("T_delta = 1/delta = {}", 1.0 / p.delta));
    out.line(format!("t_delta = {:.12}", c.t_delta));
    out.line(format!("eps = {:.6e}, eps' = {:.6e}", c.eps, c.eps_prime));
    out.line(format!("ell' = {:.12} in [{:.12}, {:.12}]", c.ell_prime, lo_b, hi_b));

    let k2 = (1.0 + 2.0 * p.delta).powi(2);
    let lo = -c.eps - 0.5;
    let hi = c.plateau_start() + 0.5;
    let mut pts: Vec<(f64, Side)> =
        (0..grid).map(|i| (lo + (hi - lo) * i as f64 / (grid - 1) as f64, Side::Right)).collect();
    for &b in profile.breakpoints() {
        if b >= lo && b <= hi {
            pts.push((b, Side::Left));
            pts.push((b, Side::Right));
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut max_d1, mut min_d2, mut max_slope2, mut max_curv) =
        (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut csv = String::from("t,phi,dphi,ddphi,slope_ratio_sq,curvature_ratio\n");
    let mut series = Vec::new();
    for &(t, side) in &pts {
        let j = profile.eval_side(t, side).map_err(lab("cap profile"))?;
        let slope2 = (j.d1 / j.value).powi(2);
        let curv = j.d2 / j.value;
        max_d1 = max_d1.max(j.d1 / j.value);
        min_d2 = min_d2.min(j.d2 / j.value);
        max_slope2 = max_slope2.max(slope2);
        max_curv = max_curv.max(curv);
        let _ = writeln!(csv, "{},{},{},{},{},{}", num(t), num(j.value), num(j.d1), num(j.d2), num(slope2), num(curv));
        series.push((t, j.value));
    }
    out.table("profile", csv);
    out.plot("profile", "t", "phi", thin(series, 2000));
    out.check("nonincreasing", max_d1 <= 1e-9, format!("max phi'/phi = {max_d1:.3e}"));
    out.check("convex", min_d2 >= -1e-9, format!("min phi''/phi = {min_d2:.3e}"));
    out.check("slope bound", max_slope2 <= k2 + 1e-9, format!("max (phi'/phi)^2 = {max_slope2:.12} vs {k2:.12}"));
    out.check("curvature bound", max_curv <= k2 + 1e-9, format!("max phi''/phi = {max_curv:.12} vs {k2:.12}"));
    out.check(
        "terminal value interval",
        c.ell_prime >= lo_b && c.ell_prime <= hi_b,
        format!("ell' = {:.12}", c.ell_prime),
    );

    let t_min = locate_ode_minimum(p.ell, p.delta)?;
    let exact_t = ode_min_location(p.delta);
    let v_min = ode_profile(p.ell, p.delta).map_err(lab("ode profile"))?.eval0(t_min).map_err(lab("ode profile"))?;
    let exact_v = ode_min_value(p.ell, p.delta);
    out.line(format!("ode minimum located at {t_min:.15} (closed form {exact_t:.15}), value {v_min:.15} (closed form {exact_v:.15})"));
    out.check("ode minimum location", (t_min - exact_t).abs() <= 1e-8, format!("|error| = {:.3e}", (t_min - exact_t).abs()));
    out.check("ode minimum value", (v_min - exact_v).abs() <= 1e-8, format!("|error| = {:.3e}", (v_min - exact_v).abs()));

    out.summary("t_delta", c.t_delta);
    out.summary("ell_prime", c.ell_prime);
    out.summary("max_slope_ratio_sq", max_slope2);
    out.summary("max_curvature_ratio", max_curv);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CuspParams {
    #[serde(deserialize_with = "real")]
    a: f64,
    #[serde(deserialize_with = "real")]
    b: f64,
    /// Rescaling `zeta^2`; defaults to half the largest admissible value.
    #[serde(default, deserialize_with = "crate::config::real_opt")]
    zeta2: Option<f64>,
    #[serde(default = "one", deserialize_with = "real")]
    base_area: f64,
    #[serde(deserialize_with = "real")]
    delta: f64,
}

fn build_conformal(p: &CuspParams) -> Result<ConformalCusp, CliError> {
    let spec = match p.zeta2 {
        Some(z) => TorusCuspSpec::new(p.a, p.b, z, p.base_area),
        None => TorusCuspSpec::with_default_rescale(p.a, p.b, p.base_area),
    }
    .map_err(lab("torus cusp"))?;
    conformal_change(&spec, p.delta).map_err(lab("conformal change"))
}

fn scan_line(name: &str, r: &CurvatureReport) -> String {
    let (lo, hi) = r.extremes();
    format!(
        "{name}: sigma in [{lo:.12}, {hi:.12}], bounds [{}, {}], worst excess {:.3e} at t = {:.6}",
        r.bounds.0, r.bounds.1, r.worst_excess, r.worst_t
    )
}

fn min_plane_series(r: &CurvatureReport) -> Vec<(f64, f64)> {
    thin(
        r.rows.iter().map(|row| (row.t, row.sigma.iter().copied().fold(f64::INFINITY, f64::min))).collect(),
        2000,
    )
}

pub(super) fn conformal(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: CuspParams = cfg.params()?;
    let grid = cfg.grid_or(10_000)?;
    let m = build_conformal(&p)?;
    let t = m.t_big;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("zeta^2 a = {}, zeta^2 b = {}, delta = {}", m.spec.zeta2_a(), m.spec.zeta2_b(), p.delta));
    out.line(format!("C = {:.12}, T = C/delta = {:.12}", m.c, t));
    let scan = |iv: (f64, f64), bounds: (f64, f64)| {
        curvature_scan_with_tolerance(&m.metric, iv, grid, bounds, 1e-6).map_err(lab("curvature scan"))
    };
    let middle = scan((t, 2.0 * t), (-1.0 - p.delta, -1.0))?;
    let before = scan((0.0, t), (-1.0, -1.0))?;
    let after = scan((2.0 * t, 3.0 * t), (-1.0, -1.0))?;
    for (name, r) in [("[T, 2T]", &middle), ("[0, T]", &before), ("[2T, 3T]", &after)] {
        out.line(scan_line(name, r));
    }
    out.check("pinched on [T, 2T]", middle.verdict, format!("worst excess {:.3e}", middle.worst_excess));
    out.check("hyperbolic on [0, T]", before.verdict, format!("worst excess {:.3e}", before.worst_excess));
    out.check("hyperbolic on [2T, 3T]", after.verdict, format!("worst excess {:.3e}", after.worst_excess));
    out.table("curvature", middle.to_csv());
    out.plot("curvature", "t", "min sigma", min_plane_series(&middle));
    out.summary("T", t);
    out.summary("sigma_min", middle.extremes().0);
    out.summary("sigma_max", middle.extremes().1);
    Ok(out)
}

pub(super) fn flatten(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: CuspParams = cfg.params()?;
    let grid = cfg.grid_or(10_000)?;
    let m = build_conformal(&p)?;
    let f = hyperbolic_flatten(&m, p.delta).map_err(lab("hyperbolic flatten"))?;
    let (_, end) = f.metric.domain();
    let k2 = (1.0 + 2.0 * p.delta).powi(2);
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("delta = {}, T = {:.12}, cap centre 3T = {:.12}", p.delta, f.t_big, f.cap_center));
    out.line(format!("flat collar [{:.12}, {:.12}]", f.collar.0, f.collar.1));
    let global = curvature_scan_with_tolerance(&f.metric, (0.0, end), grid, (-k2, 0.0), 1e-9)
        .map_err(lab("curvature scan"))?;
    let collar = curvature_scan_with_tolerance(&f.metric, f.collar, grid.min(2000), (0.0, 0.0), 1e-10)
        .map_err(lab("collar scan"))?;
    out.line(scan_line("global", &global));
    out.line(scan_line("collar", &collar));
    out.check("pinched globally", global.verdict, format!("worst excess {:.3e} at t = {:.6}", global.worst_excess, global.worst_t));
    out.check("flat collar", collar.verdict, format!("max |sigma| = {:.3e}", collar.worst_excess.max(0.0)));

    let v = f.volume_report(grid.min(2000)).map_err(lab("volume report"))?;
    let ln_diff = v.difference.ln_abs();
    out.line(format!("ln Vol(modified beyond T) = {:.12}", v.modified.ln_abs()));
    out.line(format!("ln Vol(hyperbolic beyond T) = {:.12}", v.hyperbolic.ln_abs()));
    out.line(format!(
        "ln |difference| = {ln_diff:.12}; ln bounds V1 = {:.6}, V2 = {:.6}, cap = {:.6}, total = {:.12}",
        v.ln_bound_v1, v.ln_bound_v2, v.ln_bound_cap, v.ln_bound_total
    ));
    out.check("volume difference within bounds", v.within_bound(), format!("{ln_diff:.6} <= {:.6} (logs)", v.ln_bound_total));
    out.table("curvature", global.to_csv());
    out.table(
        "volume",
        format!(
            "delta,T,ln_modified,ln_hyperbolic,ln_abs_difference,difference_sign,ln_bound_v1,ln_bound_v2,ln_bound_cap,ln_bound_total\n{},{},{},{},{},{},{},{},{},{}\n",
            p.delta,
            num(f.t_big),
            num(v.modified.ln_abs()),
            num(v.hyperbolic.ln_abs()),
            num(ln_diff),
            v.difference.signum(),
            num(v.ln_bound_v1),
            num(v.ln_bound_v2),
            num(v.ln_bound_cap),
            num(v.ln_bound_total)
        ),
    );
    out.plot("curvature", "t", "min sigma", min_plane_series(&global));
    out.summary("T", f.t_big);
    out.summary("ln_abs_difference", ln_diff);
    out.summary("ln_bound_total", v.ln_bound_total);
    out.summary("within_bound", v.within_bound() as u8 as f64);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TubeParams {
    #[serde(deserialize_with = "real")]
    half_length: f64,
    #[serde(deserialize_with = "real")]
    radius: f64,
    #[serde(deserialize_with = "reals")]
    end_radii: Vec<f64>,
    #[serde(default = "three")]
    dimension: u32,
}

fn three() -> u32 {
    3
}

pub(super) fn tube(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: TubeParams = cfg.params()?;
    let grid = cfg.grid_or(2000)?;
    if p.end_radii.len() != 2 {
        return Err(CliError::Config(format!("end_radii needs two entries, got {}", p.end_radii.len())));
    }
    let spec = TubeSpec {
        half_length: p.half_length,
        radius: p.radius,
        end_radii: (p.end_radii[0], p.end_radii[1]),
        dimension: p.dimension,
    };
    let (m, d) = tube_metric(spec).map_err(lab("tube metric"))?;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("L = {}, r = {}, end radii ({}, {}), n = {}", p.half_length, p.radius, spec.end_radii.0, spec.end_radii.1, p.dimension));
    out.line(format!("middle diameter = {:.15}", d.middle_diameter));
    out.line(format!("volume = {:.15}, bound = {:.15}, max area = {:.15}", d.volume, d.volume_bound, d.max_area));
    let (lo, hi) = m.domain();
    let scan = curvature_scan_with_tolerance(&m, (lo, hi), grid, (f64::NEG_INFINITY, f64::INFINITY), 0.0)
        .map_err(lab("curvature scan"))?;
    out.line(scan_line("curvature", &scan));
    let diam = std::f64::consts::PI * p.radius;
    out.check("round middle", (d.middle_diameter - diam).abs() <= 1e-12 * diam, format!("pi r = {diam:.15}"));
    out.check("totally geodesic slices", d.max_slice_slope <= 1e-12, format!("max |R'| = {:.3e}", d.max_slice_slope));
    out.check("volume bound", d.volume <= d.volume_bound, format!("{:.12} <= {:.12}", d.volume, d.volume_bound));
    let mut csv = String::from("t,R,dR,ddR\n");
    let mut series = Vec::new();
    for i in 0..grid {
        let t = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
        let j = m.radius_profile().eval_side(t, if i + 1 == grid { Side::Left } else { Side::Right }).map_err(lab("tube profile"))?;
        let _ = writeln!(csv, "{},{},{},{}", num(t), num(j.value), num(j.d1), num(j.d2));
        series.push((t, j.value));
    }
    out.table("radius", csv);
    out.table("curvature", scan.to_csv());
    out.plot("radius", "t", "R", thin(series, 2000));
    out.summary("volume", d.volume);
    out.summary("volume_bound", d.volume_bound);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeifertParams {
    #[serde(deserialize_with = "real")]
    m_r: f64,
    #[serde(deserialize_with = "real")]
    delta: f64,
    /// Requested `zeta` as a fraction of the largest admissible value.
    #[serde(deserialize_with = "real")]
    zeta_fraction: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompatParams {
    #[serde(default)]
    genus: i64,
    #[serde(default)]
    exceptional: Vec<(i64, i64)>,
    #[serde(deserialize_with = "real_rows")]
    boundary_products: Vec<Vec<f64>>,
    expect_compatible: Option<bool>,
    seifert: Option<SeifertParams>,
}

pub(super) fn compat(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p: CompatParams = cfg.params()?;
    let products = p
        .boundary_products
        .iter()
        .map(|r| match r.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(CliError::Config("each boundary product needs two entries".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let data = SeifertFibrationData::new(p.genus, p.exceptional.clone(), products).map_err(lab("seifert data"))?;
    let compatible = leeb_compatibility(&data).map_err(lab("compatibility"))?;
    let cones: Vec<i64> = p.exceptional.iter().map(|e| e.0).collect();
    let chi = orbifold_euler(p.genus, data.boundary_count, &cones).map_err(lab("orbifold euler"))?;
    let mut out = Outcome::new(cfg.kind);
    out.line(format!("genus {}, {} boundary tori, exceptional fibres {:?}", p.genus, data.boundary_count, p.exceptional));
    out.line(format!("euler number e = {:.15}", data.euler_number()));
    out.line(format!("orbifold euler characteristic = {chi:.15}"));
    out.line(format!("compatible = {compatible}"));
    if let Some(e) = p.expect_compatible {
        out.check("compatibility verdict", compatible == e, format!("expected {e}, got {compatible}"));
    }
    let mut csv = String::from("genus,boundary_count,euler_number,orbifold_euler,compatible\n");
    let _ = writeln!(csv, "{},{},{},{},{}", p.genus, data.boundary_count, num(data.euler_number()), num(chi), compatible);
    out.table("compat", csv);
    out.summary("compatible", compatible as u8 as f64);
    out.summary("orbifold_euler", chi);
    if let Some(s) = p.seifert {
        let zb = seifert_zeta_bar(s.delta).map_err(lab("seifert cap"))?;
        let cap = seifert_cusp_cap(s.m_r, s.delta, s.zeta_fraction * zb).map_err(lab("seifert cap"))?;
        let target = cap.zeta * s.m_r;
        let err = (cap.terminal_circumference - target).abs() / target;
        let vol = cap.cap_region_volume().map_err(lab("seifert cap volume"))?;
        out.line(format!(
            "seifert cap: zeta_bar = {zb:.12}, delta_r = {:.12}, T = {:.12}, terminal circumference {:.15} (target {target:.15})",
            cap.delta_r, cap.t_big, cap.terminal_circumference
        ));
        out.check("terminal circumference", err <= 1e-8, format!("relative error {err:.3e}"));
        out.check("cap region volume", vol <= cap.cap_region_bound(), format!("{vol:.6e} <= {:.6e}", cap.cap_region_bound()));
        out.summary("delta_r", cap.delta_r);
    }
    Ok(out)
}
