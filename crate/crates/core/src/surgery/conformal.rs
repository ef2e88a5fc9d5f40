//! Conformal-type change of a hyperbolic torus cusp and its flattening.
//!
//! Along `[T, 2T]` the cusp metric `e^{-2t}(dx^2 + dy^2) + dt^2` is blended into
//! `e^{-2t}(z_a dx^2 + z_b dy^2) + dt^2`, where `z_a = zeta^2 a`, `z_b = zeta^2 b`.
//! Far out the exponential warping is replaced by a capped profile, which makes the
//! cusp end in a flat collar.

use std::sync::Arc;

use crate::error::{invalid, precondition, Result};
use crate::quadrature::integrate;
use crate::numeric::{scaled_sum, Scaled};
use crate::profiles::{
    cusp_cap_profile, CapParameters, Piece, Profile, Segment, Side, Tail, BUMP_D2_MAX, BUMP_D2_MIN,
};
use crate::warped::{cusp_volume_scaled, DoubleWarpedMetric3D, WarpedMetric};

/// Relative accuracy of the volume difference integral.
const DIFFERENCE_REL_TOL: f64 = 1e-10;

/// Target flat metric `a dx^2 + b dy^2` on a cusp torus, in coordinates where the
/// reference metric is `dx^2 + dy^2`, with rescaling `zeta^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusCuspSpec {
    pub a: f64,
    pub b: f64,
    pub zeta2: f64,
    /// Coordinate area of the torus under `dx^2 + dy^2`.
    pub base_area: f64,
}

impl TorusCuspSpec {
    pub fn new(a: f64, b: f64, zeta2: f64, base_area: f64) -> Result<Self> {
        let s = Self {
            a,
            b,
            zeta2,
            base_area,
        };
        for (name, v) in [("zeta^2 a", s.zeta2_a()), ("zeta^2 b", s.zeta2_b())] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(base_area > 0.0) {
            return Err(invalid(format!(
                "base area must be positive, got {base_area}"
            )));
        }
        Ok(s)
    }

    /// Rescale `h` by `zeta^2 = min(1/a, 1/b) / 2`, which puts both products in (0, 1).
    pub fn with_default_rescale(a: f64, b: f64, base_area: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(invalid("flat metric coefficients must be positive"));
        }
        Self::new(a, b, 0.5 * (1.0 / a).min(1.0 / b), base_area)
    }

    pub fn zeta2_a(&self) -> f64 {
        self.zeta2 * self.a
    }

    pub fn zeta2_b(&self) -> f64 {
        self.zeta2 * self.b
    }
}

/// `C` with `T = C / delta`.
pub fn conformal_constant(zeta2_a: f64, zeta2_b: f64) -> f64 {
    [
        4.0 * (1.0 - zeta2_a) / zeta2_a,
        4.0 * (1.0 - zeta2_b) / zeta2_b,
        (BUMP_D2_MAX + 4.0) / zeta2_a,
        (BUMP_D2_MAX + 4.0) / zeta2_b,
        (-BUMP_D2_MIN / 4.0).sqrt(),
    ]
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// Cusp after the conformal-type change.
#[derive(Clone, Debug)]
pub struct ConformalCusp {
    pub metric: DoubleWarpedMetric3D,
    pub spec: TorusCuspSpec,
    pub delta: f64,
    pub c: f64,
    pub t_big: f64,
}

fn conformal_profile(name: &str, t_big: f64, terminal: f64) -> Result<Profile> {
    Profile::analytic(
        name,
        0.0,
        f64::INFINITY,
        Piece::Conformal { t_big, terminal },
        Tail::Exponential {
            from: 2.0 * t_big,
            rate: 1.0,
        },
    )
}

/// Blend the hyperbolic cusp into `e^{-2t} zeta^2 h` along `[T, 2T]`, `T = C / delta`.
pub fn conformal_change(spec: &TorusCuspSpec, delta: f64) -> Result<ConformalCusp> {
    let spec = TorusCuspSpec::new(spec.a, spec.b, spec.zeta2, spec.base_area)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    let c = conformal_constant(spec.zeta2_a(), spec.zeta2_b());
    let t_big = c / delta;
    let metric = DoubleWarpedMetric3D::new(
        conformal_profile("eta_a", t_big, spec.zeta2_a())?,
        conformal_profile("eta_b", t_big, spec.zeta2_b())?,
        spec.base_area,
    )?;
    Ok(ConformalCusp {
        metric,
        spec,
        delta,
        c,
        t_big,
    })
}

/// Cusp ending in a flat collar.
#[derive(Clone, Debug)]
pub struct FlattenedCusp {
    pub metric: DoubleWarpedMetric3D,
    pub cap: CapParameters,
    pub delta: f64,
    pub t_big: f64,
    /// Center of the capping profile (`3T`).
    pub cap_center: f64,
    /// Terminal flat collar.
    pub collar: (f64, f64),
    /// `ln` of the terminal warping constants of `x` and `y`.
    pub ln_terminal: (f64, f64),
    spec: TorusCuspSpec,
}

fn capped(
    name: &str,
    conformal: &Profile,
    ln_scale: f64,
    t_big: f64,
    cap: &Arc<Profile>,
    end: f64,
    tail: Tail,
) -> Result<Profile> {
    let splice = 2.5 * t_big;
    let mut segs: Vec<Segment> = conformal
        .segments()
        .iter()
        .filter(|s| s.start < splice)
        .cloned()
        .map(|mut s| {
            s.end = s.end.min(splice);
            s
        })
        .collect();
    segs.push(Segment::new(
        splice,
        end,
        Piece::Scaled {
            ln_scale,
            shift: 3.0 * t_big,
            inner: Arc::clone(cap),
        },
    ));
    Profile::from_segments(name, segs, tail)
}

/// Replace the exponential tail beyond `5T/2` by a cap centred at `3T`.
///
/// Curvatures stay in `[-(1+2 delta)^2, 0]` and the metric is flat on
/// `[3T + t_delta + eps', 3T + 2 t_delta]`.
pub fn hyperbolic_flatten(m: &ConformalCusp, delta: f64) -> Result<FlattenedCusp> {
    let t_big = m.t_big;
    for p in [m.metric.eta_a(), m.metric.eta_b()] {
        match p.tail() {
            Tail::Exponential { from, rate } if rate == 1.0 && from <= 2.0 * t_big => {}
            _ => {
                return Err(precondition(format!(
                    "profile {} has no exact e^-t tail beyond 2T",
                    p.name()
                )))
            }
        }
    }
    let (cap_profile, cap) = cusp_cap_profile(1.0, delta)?;
    let cap_profile = Arc::new(cap_profile);
    let center = 3.0 * t_big;
    let end = center + 2.0 * cap.t_delta;
    let collar_start = center + cap.plateau_start();
    if collar_start >= end || cap.eps >= 0.5 * t_big {
        return Err(precondition("cap does not fit into the cusp"));
    }
    let ln_a = m.spec.zeta2_a().ln() - center;
    let ln_b = m.spec.zeta2_b().ln() - center;
    let tail = Tail::Constant { from: collar_start };
    let eta_a = capped(
        "eta_a_flat",
        m.metric.eta_a(),
        ln_a,
        t_big,
        &cap_profile,
        end,
        tail,
    )?;
    let eta_b = capped(
        "eta_b_flat",
        m.metric.eta_b(),
        ln_b,
        t_big,
        &cap_profile,
        end,
        tail,
    )?;
    let metric = DoubleWarpedMetric3D::new(eta_a, eta_b, m.spec.base_area)?;
    let ln_ell = cap.ell_prime.ln();
    Ok(FlattenedCusp {
        metric,
        cap,
        delta,
        t_big,
        cap_center: center,
        collar: (collar_start, end),
        ln_terminal: (ln_a + ln_ell, ln_b + ln_ell),
        spec: m.spec,
    })
}

/// Volume comparison between the flattened cusp and the hyperbolic cusp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlattenVolume {
    /// Volume of the flattened cusp beyond `T`.
    pub modified: Scaled,
    /// Volume of the hyperbolic cusp beyond `T`, `A e^{-2T} / 2`.
    pub hyperbolic: Scaled,
    /// `modified - hyperbolic`; both cusps agree on `[0, T]`.
    pub difference: Scaled,
    /// `ln` of the interpolation-region bound `A e^{-T}(1/2 - e^{-T}/2)`.
    pub ln_bound_v1: f64,
    /// `ln` of the exponential-tail bound `V_max e^{-4T}/2`.
    pub ln_bound_v2: f64,
    /// `ln` of the cap-region bound `V_max e^{-2(3T - eps)}(2 t_delta + eps)`.
    pub ln_bound_cap: f64,
    pub ln_bound_total: f64,
    /// Grid maximum of the cross-section area factor over `[T, 2T]`.
    pub area_max: f64,
}

impl FlattenVolume {
    pub fn within_bound(&self) -> bool {
        self.difference.ln_abs() <= self.ln_bound_total
    }
}

fn ln_sum(xs: &[f64]) -> f64 {
    scaled_sum(xs.iter().map(|&l| Scaled::from_ln(l))).ln_abs()
}

impl FlattenedCusp {
    pub fn spec(&self) -> &TorusCuspSpec {
        &self.spec
    }

    /// Modified minus hyperbolic volume beyond `T`, integrated piece by piece.
    ///
    /// Subtracting the two volumes cancels completely: on `[T, 2T]` the density
    /// ratio minus one is `-(1 - bump) ((1 - z_a) + (1 - z_b) - (1 - z_a)(1 - z_b)(1 - bump))`,
    /// which is far below the rounding error of either volume near `T`. That factor
    /// is integrated in log form, `[2T, 5T/2]` has a closed form, and the cap region
    /// is compared with the hyperbolic tail directly.
    fn volume_difference(&self) -> Result<Scaled> {
        let t = self.t_big;
        let ln_area = self.spec.base_area.ln();
        let (za, zb) = (self.spec.zeta2_a(), self.spec.zeta2_b());
        let (ca, cb) = (1.0 - za, 1.0 - zb);
        // Log of the integrand in u = (s - T)/T, with ds = T du.
        let ln_f = |u: f64| {
            let w = 1.0 / (1.0 - u) - 1.0 / u;
            let ln_nb = if w < 0.0 { w - w.exp().ln_1p() } else { -(-w).exp().ln_1p() };
            let nb = ln_nb.exp();
            ln_area - 2.0 * t * (1.0 + u) + ln_nb + (ca + cb - ca * cb * nb).ln() + t.ln()
        };
        let n = 4000;
        let (mut peak, mut u_peak) = (f64::NEG_INFINITY, 0.5);
        for i in 1..n {
            let u = i as f64 / n as f64;
            let l = ln_f(u);
            if l > peak {
                (peak, u_peak) = (l, u);
            }
        }
        let g = |u: f64| {
            let v = (ln_f(u) - peak).exp();
            if v.is_finite() { v } else { 0.0 }
        };
        let lo = integrate(g, 0.0, u_peak, DIFFERENCE_REL_TOL, 0.0)?.value;
        let hi = integrate(g, u_peak, 1.0, DIFFERENCE_REL_TOL, 0.0)?.value;
        let blend = Scaled::new(-(lo + hi), peak);
        let plain = Scaled::new(
            za * zb - 1.0,
            ln_area - 4.0 * t + (-(-t).exp_m1()).ln() - 2f64.ln(),
        );
        let splice = 2.5 * t;
        let cap = cusp_volume_scaled(&self.metric, splice, self.collar.1)?
            .value
            .sub(Scaled::from_ln(ln_area - 2.0 * splice - 2f64.ln()));
        Ok(scaled_sum([blend, plain, cap]))
    }

    /// Compare volumes beyond `T` with the hyperbolic cusp and with the bounds,
    /// scanning the area factor on `grid` points of `[T, 2T]`.
    pub fn volume_report(&self, grid: usize) -> Result<FlattenVolume> {
        let t = self.t_big;
        let area = self.spec.base_area;
        let end = self.collar.1;
        let modified = cusp_volume_scaled(&self.metric, t, end)?.value;
        let hyperbolic = Scaled::from_ln(area.ln() - 2.0 * t - 2f64.ln());
        let difference = self.volume_difference()?;
        let mut ln_area_max = f64::NEG_INFINITY;
        let n = grid.max(2);
        for i in 0..n {
            let s = t + t * i as f64 / (n - 1) as f64;
            ln_area_max = ln_area_max.max(self.metric.ln_density(s, Side::Right)? + 2.0 * s);
        }
        let area_max = ln_area_max.exp();
        let ln_vmax = self.spec.zeta2_a().ln() + self.spec.zeta2_b().ln() + area.ln();
        let ln_bound_v1 = ln_area_max - t + (0.5 - 0.5 * (-t).exp()).ln();
        let ln_bound_v2 = ln_vmax - 4.0 * t - 2f64.ln();
        let eps = self.cap.eps;
        let ln_bound_cap = ln_vmax - 2.0 * (3.0 * t - eps) + (2.0 * self.cap.t_delta + eps).ln();
        Ok(FlattenVolume {
            modified,
            hyperbolic,
            difference,
            ln_bound_v1,
            ln_bound_v2,
            ln_bound_cap,
            ln_bound_total: ln_sum(&[ln_bound_v1, ln_bound_v2, ln_bound_cap]),
            area_max,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{curvature_scan, sectional_curvatures_3d};

    fn spec() -> TorusCuspSpec {
        TorusCuspSpec::new(0.3, 0.7, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_and_time_scale() {
        let c = conformal_constant(0.3, 0.7);
        assert!((c - (BUMP_D2_MAX + 4.0) / 0.3).abs() < 1e-12);
        let m = conformal_change(&spec(), 0.1).unwrap();
        assert!((m.t_big - c / 0.1).abs() < 1e-9);
    }

    #[test]
    fn spec_validation() {
        assert!(TorusCuspSpec::new(2.0, 0.5, 1.0, 1.0).is_err());
        let s = TorusCuspSpec::with_default_rescale(2.0, 0.5, 1.0).unwrap();
        assert!(s.zeta2_a() < 1.0 && s.zeta2_b() < 1.0);
    }

    #[test]
    fn terminal_metric_is_rescaled_flat_metric() {
        let m = conformal_change(&spec(), 0.1).unwrap();
        let t = 2.0 * m.t_big;
        let a = m.metric.eta_a().log_eval(t).unwrap();
        let b = m.metric.eta_b().log_eval(t).unwrap();
        assert!((a.ln_value + t - 0.3f64.ln()).abs() < 1e-12);
        assert!((b.ln_value + t - 0.7f64.ln()).abs() < 1e-12);
        assert_eq!(
            sectional_curvatures_3d(&m.metric, 0.5 * m.t_big).unwrap(),
            [-1.0, -1.0, -1.0]
        );
    }

    #[test]
    fn interpolation_pinched() {
        let m = conformal_change(&spec(), 0.1).unwrap();
        let r = curvature_scan(&m.metric, (m.t_big, 2.0 * m.t_big), 20_000, (-1.1, -1.0)).unwrap();
        assert!(r.verdict, "worst {} at {}", r.worst_excess, r.worst_t);
    }

    #[test]
    fn volume_difference_matches_subtraction_when_resolvable() {
        let spec = TorusCuspSpec::new(0.95, 0.9, 1.0, 2.0).unwrap();
        let m = conformal_change(&spec, 0.95).unwrap();
        let f = hyperbolic_flatten(&m, 0.5).unwrap();
        let v = f.volume_report(200).unwrap();
        let naive = v.modified.sub(v.hyperbolic);
        assert!(naive.signum() < 0.0 && v.difference.signum() < 0.0);
        let rel = (naive.ln_abs() - v.difference.ln_abs()).abs();
        assert!(rel < 1e-6, "naive {} direct {}", naive.ln_abs(), v.difference.ln_abs());
    }

    #[test]
    fn flattened_collar_and_pinching() {
        let m = conformal_change(&spec(), 0.1).unwrap();
        let f = hyperbolic_flatten(&m, 0.1).unwrap();
        let k2 = 1.2f64 * 1.2;
        let (lo, hi) = f.metric.domain();
        let r = curvature_scan(&f.metric, (lo, hi), 50_000, (-k2, 0.0)).unwrap();
        assert!(r.verdict, "worst {} at {}", r.worst_excess, r.worst_t);
        let cap = (f.cap_center - 1.0, hi);
        let r = curvature_scan(&f.metric, cap, 40_000, (-k2, 0.0)).unwrap();
        assert!(r.verdict, "worst {} at {}", r.worst_excess, r.worst_t);
        let c = curvature_scan(&f.metric, f.collar, 1000, (0.0, 0.0)).unwrap();
        assert!(c.verdict);
        let v = f.volume_report(1000).unwrap();
        assert!(v.within_bound());
    }
}
