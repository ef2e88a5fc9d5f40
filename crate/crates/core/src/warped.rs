//! Sectional curvatures and volumes of warped product metrics.
//!
//! 2D: `phi(t)^2 dx^2 + dt^2`, one plane with `sigma = -phi''/phi`.
//! 3D: `eta_a(t)^2 dx^2 + eta_b(t)^2 dy^2 + dt^2` with
//! `sigma_xy = -eta_a' eta_b' / (eta_a eta_b)`, `sigma_xt = -eta_a''/eta_a`,
//! `sigma_yt = -eta_b''/eta_b`.
//!
//! Everything is computed from log jets, so profiles far below f64 range are fine.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, precondition, LabError, Result};
use crate::numeric::{scaled_sum, Scaled};
use crate::profiles::{LogJet, Profile, Side, Tail};
use crate::quadrature::integrate;

/// `phi^2 dx^2 + dt^2` over a circle of coordinate length `circumference`.
#[derive(Clone, Debug)]
pub struct WarpedMetric2D {
    phi: Profile,
    circumference: f64,
}

impl WarpedMetric2D {
    pub fn new(phi: Profile, circumference: f64) -> Result<Self> {
        if !(circumference > 0.0) {
            return Err(invalid(format!(
                "circumference must be positive, got {circumference}"
            )));
        }
        Ok(Self { phi, circumference })
    }

    pub fn phi(&self) -> &Profile {
        &self.phi
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }
}

/// `eta_a^2 dx^2 + eta_b^2 dy^2 + dt^2` over a torus of coordinate area `base_area`.
#[derive(Clone, Debug)]
pub struct DoubleWarpedMetric3D {
    eta_a: Profile,
    eta_b: Profile,
    base_area: f64,
}

impl DoubleWarpedMetric3D {
    pub fn new(eta_a: Profile, eta_b: Profile, base_area: f64) -> Result<Self> {
        if !(base_area > 0.0) {
            return Err(invalid(format!(
                "base area must be positive, got {base_area}"
            )));
        }
        if eta_a.domain() != eta_b.domain() {
            return Err(invalid(format!(
                "profile domains differ: {:?} vs {:?}",
                eta_a.domain(),
                eta_b.domain()
            )));
        }
        Ok(Self {
            eta_a,
            eta_b,
            base_area,
        })
    }

    pub fn eta_a(&self) -> &Profile {
        &self.eta_a
    }

    pub fn eta_b(&self) -> &Profile {
        &self.eta_b
    }

    pub fn base_area(&self) -> f64 {
        self.base_area
    }
}

/// Common interface of the warped metrics, used by scans and volumes.
pub trait WarpedMetric: Sync {
    fn profiles(&self) -> Vec<&Profile>;
    /// Constant factor of the volume density (circumference or base area).
    fn density_factor(&self) -> f64;
    fn plane_names(&self) -> Vec<&'static str>;
    fn curvatures(&self, t: f64, side: Side) -> Result<Vec<f64>>;

    fn domain(&self) -> (f64, f64) {
        self.profiles()[0].domain()
    }

    /// Sorted breakpoints of all profiles.
    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .profiles()
            .iter()
            .flat_map(|p| p.breakpoints().iter().copied())
            .collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// `ln` of the volume density at `t`.
    fn ln_density(&self, t: f64, side: Side) -> Result<f64> {
        let mut s = self.density_factor().ln();
        for p in self.profiles() {
            s += positive_log(p, t, side)?.ln_value;
        }
        Ok(s)
    }
}

fn positive_log(p: &Profile, t: f64, side: Side) -> Result<LogJet> {
    let l = p.log_eval_side(t, side)?;
    if l.ln_value.is_nan() || l.ln_value == f64::NEG_INFINITY || !l.log_d1.is_finite() {
        return Err(LabError::Degenerate(format!(
            "profile {} is not positive at t = {t}",
            p.name()
        )));
    }
    Ok(l)
}

impl WarpedMetric for WarpedMetric2D {
    fn profiles(&self) -> Vec<&Profile> {
        vec![&self.phi]
    }

    fn density_factor(&self) -> f64 {
        self.circumference
    }

    fn plane_names(&self) -> Vec<&'static str> {
        vec!["sigma"]
    }

    fn curvatures(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        Ok(vec![sectional_curvature_2d_side(self, t, side)?])
    }
}

impl WarpedMetric for DoubleWarpedMetric3D {
    fn profiles(&self) -> Vec<&Profile> {
        vec![&self.eta_a, &self.eta_b]
    }

    fn density_factor(&self) -> f64 {
        self.base_area
    }

    fn plane_names(&self) -> Vec<&'static str> {
        vec!["sigma_xy", "sigma_xt", "sigma_yt"]
    }

    fn curvatures(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        Ok(sectional_curvatures_3d_side(self, t, side)?.to_vec())
    }
}

/// `-phi''/phi` at `t` (right-continuous).
pub fn sectional_curvature_2d(m: &WarpedMetric2D, t: f64) -> Result<f64> {
    sectional_curvature_2d_side(m, t, Side::Right)
}

pub fn sectional_curvature_2d_side(m: &WarpedMetric2D, t: f64, side: Side) -> Result<f64> {
    Ok(-positive_log(&m.phi, t, side)?.ratio_d2)
}

/// `(sigma_xy, sigma_xt, sigma_yt)` at `t` (right-continuous).
pub fn sectional_curvatures_3d(m: &DoubleWarpedMetric3D, t: f64) -> Result<[f64; 3]> {
    sectional_curvatures_3d_side(m, t, Side::Right)
}

pub fn sectional_curvatures_3d_side(
    m: &DoubleWarpedMetric3D,
    t: f64,
    side: Side,
) -> Result<[f64; 3]> {
    let a = positive_log(&m.eta_a, t, side)?;
    let b = positive_log(&m.eta_b, t, side)?;
    Ok([-a.log_d1 * b.log_d1, -a.ratio_d2, -b.ratio_d2])
}

/// Range of one curvature over a scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneRange {
    pub min: f64,
    pub max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// One scan sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub sigma: Vec<f64>,
}

/// Result of a curvature scan against bounds `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub planes: Vec<String>,
    pub ranges: Vec<PlaneRange>,
    pub bounds: (f64, f64),
    pub tolerance: f64,
    pub verdict: bool,
    /// Sample with the largest excess over the bounds (negative when inside).
    pub worst_t: f64,
    pub worst_excess: f64,
    pub rows: Vec<ScanRow>,
}

impl CurvatureReport {
    /// `t,<planes>` rows followed by a `# verdict` footer.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for p in &self.planes {
            s.push(',');
            s.push_str(p);
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:.16e}", r.t);
            for v in &r.sigma {
                let _ = write!(s, ",{:.16e}", v);
            }
            s.push('\n');
        }
        let _ = writeln!(
            s,
            "# verdict {} bounds [{:e}, {:e}] worst_t {:.16e} worst_excess {:e}",
            if self.verdict { "pass" } else { "fail" },
            self.bounds.0,
            self.bounds.1,
            self.worst_t,
            self.worst_excess
        );
        s
    }

    /// Overall minimum and maximum over all planes.
    pub fn extremes(&self) -> (f64, f64) {
        self.ranges
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.min), hi.max(r.max))
            })
    }
}

/// Default slack of [`curvature_scan`].
pub const SCAN_TOLERANCE: f64 = 1e-9;

/// Scan all curvatures on `n_samples` uniform points of `interval`, plus both
/// one-sided limits at every breakpoint inside it.
pub fn curvature_scan<M: WarpedMetric>(
    m: &M,
    interval: (f64, f64),
    n_samples: usize,
    bounds: (f64, f64),
) -> Result<CurvatureReport> {
    curvature_scan_with_tolerance(m, interval, n_samples, bounds, SCAN_TOLERANCE)
}

pub fn curvature_scan_with_tolerance<M: WarpedMetric>(
    m: &M,
    interval: (f64, f64),
    n_samples: usize,
    bounds: (f64, f64),
    tolerance: f64,
) -> Result<CurvatureReport> {
    let (a, b) = interval;
    if n_samples < 2 {
        return Err(invalid("a scan needs at least two samples"));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("scan interval must be finite"));
    }
    if a > b {
        return Err(LabError::InvertedInterval { lo: a, hi: b });
    }
    let mut pts: Vec<(f64, Side)> = (0..n_samples)
        .map(|i| {
            let t = if i == n_samples - 1 {
                b
            } else {
                a + (b - a) * i as f64 / (n_samples - 1) as f64
            };
            (
                t,
                if i == n_samples - 1 {
                    Side::Left
                } else {
                    Side::Right
                },
            )
        })
        .collect();
    for bp in m.breakpoints() {
        if bp >= a && bp <= b {
            pts.push((bp, Side::Left));
            pts.push((bp, Side::Right));
        }
    }
    pts.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then((x.1 == Side::Right).cmp(&(y.1 == Side::Right)))
    });
    let rows = pts
        .par_iter()
        .map(|&(t, side)| m.curvatures(t, side).map(|sigma| ScanRow { t, sigma }))
        .collect::<Result<Vec<_>>>()?;
    let planes: Vec<String> = m.plane_names().iter().map(|s| s.to_string()).collect();
    let mut ranges = vec![
        PlaneRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            t_min: a,
            t_max: a
        };
        planes.len()
    ];
    let (lo, hi) = bounds;
    let mut worst_t = a;
    let mut worst_excess = f64::NEG_INFINITY;
    for r in &rows {
        for (k, &v) in r.sigma.iter().enumerate() {
            let pr = &mut ranges[k];
            if v < pr.min {
                pr.min = v;
                pr.t_min = r.t;
            }
            if v > pr.max {
                pr.max = v;
                pr.t_max = r.t;
            }
            let excess = if v.is_nan() {
                f64::INFINITY
            } else {
                (lo - v).max(v - hi)
            };
            if excess > worst_excess {
                worst_excess = excess;
                worst_t = r.t;
            }
        }
    }
    Ok(CurvatureReport {
        planes,
        ranges,
        bounds,
        tolerance,
        verdict: worst_excess <= tolerance,
        worst_t,
        worst_excess,
        rows,
    })
}

/// Volume with its log scale kept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: Scaled,
    /// Whether a closed-form exponential or constant tail was used.
    pub closed_form_tail: bool,
}

const VOLUME_REL_TOL: f64 = 1e-13;

/// Volume of the region `t in [t0, t1]`; `t1` may be infinite when every profile
/// has an exponential tail.
pub fn cusp_volume<M: WarpedMetric>(m: &M, t0: f64, t1: f64) -> Result<f64> {
    Ok(cusp_volume_scaled(m, t0, t1)?.value.value())
}

pub fn cusp_volume_scaled<M: WarpedMetric>(m: &M, t0: f64, t1: f64) -> Result<VolumeEstimate> {
    if t0 > t1 {
        return Err(LabError::InvertedInterval { lo: t0, hi: t1 });
    }
    let (dlo, dhi) = m.domain();
    if !t0.is_finite() || t0 < dlo || t1 > dhi {
        return Err(LabError::OutOfRange {
            t: if t0 < dlo || !t0.is_finite() { t0 } else { t1 },
            lo: dlo,
            hi: dhi,
        });
    }
    let mut rate = 0.0;
    let mut closed = true;
    for p in m.profiles() {
        match p.tail() {
            Tail::Exponential { rate: r, .. } => rate += r,
            Tail::Constant { .. } => {}
            Tail::Open => closed = false,
        }
    }
    // Start of the region where every profile follows its closed-form tail.
    let tail_start = m
        .profiles()
        .iter()
        .map(|p| match p.tail() {
            Tail::Exponential { from, .. } | Tail::Constant { from } => from,
            Tail::Open => f64::INFINITY,
        })
        .fold(t0, f64::max);
    let use_tail = closed && tail_start < t1;
    let numeric_end = if use_tail { tail_start } else { t1 };
    if !numeric_end.is_finite() {
        return Err(precondition(
            "infinite upper limit needs exponential or constant tails on every profile",
        ));
    }
    let mut parts = vec![integrate_numeric(m, t0, numeric_end)?];
    if use_tail {
        let l0 = m.ln_density(tail_start, Side::Right)?;
        let tail = if rate > 0.0 {
            let frac = if t1.is_finite() {
                -(-rate * (t1 - tail_start)).exp_m1()
            } else {
                1.0
            };
            Scaled::from_ln(l0 - rate.ln() + frac.ln())
        } else if t1.is_finite() {
            Scaled::from_ln(l0 + (t1 - tail_start).ln())
        } else {
            return Err(precondition("constant tail has infinite volume"));
        };
        parts.push(tail);
    }
    Ok(VolumeEstimate {
        value: scaled_sum(parts),
        closed_form_tail: use_tail,
    })
}

fn integrate_numeric<M: WarpedMetric>(m: &M, p: f64, q: f64) -> Result<Scaled> {
    if p >= q {
        return Ok(Scaled::ZERO);
    }
    let mut cuts = vec![p];
    cuts.extend(m.breakpoints().into_iter().filter(|&b| b > p && b < q));
    cuts.push(q);
    let mut total = Scaled::ZERO;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut reference = f64::NEG_INFINITY;
        for k in 0..9 {
            let t = a + (b - a) * (k as f64 + 0.5) / 9.0;
            reference = reference.max(m.ln_density(t, Side::Right)?);
        }
        let q = integrate(
            |t| {
                m.ln_density(t, Side::Right)
                    .map(|l| (l - reference).exp())
                    .unwrap_or(f64::NAN)
            },
            a,
            b,
            VOLUME_REL_TOL,
            0.0,
        )?;
        total = total.add(Scaled::new(q.value, reference));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{exp_profile, Piece};

    fn hyperbolic_3d(area: f64) -> DoubleWarpedMetric3D {
        DoubleWarpedMetric3D::new(exp_profile(1.0).unwrap(), exp_profile(1.0).unwrap(), area)
            .unwrap()
    }

    #[test]
    fn hyperbolic_cusp_curvatures() {
        let m = hyperbolic_3d(1.0);
        for &t in &[-3.0, 0.0, 17.5, 900.0] {
            assert_eq!(sectional_curvatures_3d(&m, t).unwrap(), [-1.0, -1.0, -1.0]);
        }
    }

    #[test]
    fn flat_and_mixed_curvatures() {
        let c = |v| {
            Profile::analytic(
                "c",
                0.0,
                5.0,
                Piece::constant(v),
                Tail::Constant { from: 0.0 },
            )
            .unwrap()
        };
        let flat = DoubleWarpedMetric3D::new(c(2.0), c(3.0), 1.0).unwrap();
        assert_eq!(
            sectional_curvatures_3d(&flat, 1.0).unwrap(),
            [0.0, 0.0, 0.0]
        );
        let cosh = Profile::analytic(
            "cosh",
            -5.0,
            5.0,
            Piece::TwoExp {
                a: 0.5,
                b: 0.5,
                k: 1.0,
            },
            Tail::Open,
        )
        .unwrap();
        let e = Profile::analytic(
            "e",
            -5.0,
            5.0,
            Piece::Exp {
                ln_amp: 0.0,
                rate: 1.0,
            },
            Tail::Open,
        )
        .unwrap();
        let m = DoubleWarpedMetric3D::new(cosh, e, 1.0).unwrap();
        let s = sectional_curvatures_3d(&m, 0.0).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] + 1.0).abs() < 1e-15 && (s[2] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_volumes_closed_form() {
        let m = hyperbolic_3d(2.5);
        let v = cusp_volume(&m, 3.0, f64::INFINITY).unwrap();
        assert!((v - 2.5 * (-6f64).exp() / 2.0).abs() < 1e-9 * v);
        let m2 = WarpedMetric2D::new(exp_profile(1.0).unwrap(), 1.7).unwrap();
        let v = cusp_volume(&m2, 2.0, f64::INFINITY).unwrap();
        assert!((v - 1.7 * (-2f64).exp()).abs() < 1e-15);
        let v = cusp_volume(&m2, 2.0, 4.0).unwrap();
        assert!((v - 1.7 * ((-2f64).exp() - (-4f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn deep_cusp_volume_in_log_scale() {
        let m = hyperbolic_3d(1.0);
        let v = cusp_volume_scaled(&m, 1000.0, f64::INFINITY).unwrap();
        assert!((v.value.ln_abs() - (-2000.0 - 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn inverted_interval_rejected() {
        assert!(matches!(
            cusp_volume(&hyperbolic_3d(1.0), 2.0, 1.0),
            Err(LabError::InvertedInterval { .. })
        ));
    }

    #[test]
    fn scan_verdicts() {
        let r = curvature_scan(&hyperbolic_3d(1.0), (0.0, 10.0), 101, (-1.0, -1.0)).unwrap();
        assert!(r.verdict);
        let r = curvature_scan(&hyperbolic_3d(1.0), (0.0, 10.0), 101, (-0.5, 0.0)).unwrap();
        assert!(!r.verdict);
        assert!((r.worst_excess - 0.5).abs() < 1e-15);
        assert!(r.to_csv().ends_with("\n") && r.to_csv().contains("# verdict fail"));
    }
}
