//! Capping a Seifert cusp `m_r e^{-t}` so that it ends flat with a prescribed
//! terminal circumference.

use std::sync::Arc;

use crate::error::{invalid, LabError, Result};
use crate::profiles::cap::build_cap;
use crate::profiles::{cusp_cap_profile, CapParameters, Piece, Profile, Tail};
use crate::warped::{cusp_volume, WarpedMetric2D};

/// Capped Seifert cusp.
#[derive(Clone, Debug)]
pub struct SeifertCap {
    pub metric: WarpedMetric2D,
    pub cap: CapParameters,
    pub m_r: f64,
    /// Requested slack.
    pub delta: f64,
    /// Nominal cusp depth `1/delta`.
    pub t_nominal: f64,
    /// Slack actually used, chosen so that the terminal circumference is `zeta m_r`.
    pub delta_r: f64,
    /// Depth actually used, `1/delta_r`.
    pub t_big: f64,
    pub zeta: f64,
    pub zeta_bar: f64,
    pub terminal_circumference: f64,
}

/// `ln(e^{-1/d} ell'(d)/ell)`, the log of the terminal circumference per unit `m_r`.
fn ln_ratio(d: f64) -> Result<f64> {
    let (_, c) = build_cap(1.0, d, false)?;
    Ok(-1.0 / d + c.ell_prime.ln())
}

/// Largest admissible `zeta` for slack `delta`: half the terminal ratio at `delta`.
pub fn seifert_zeta_bar(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(0.5 * ln_ratio(delta)?.exp())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    Ok(())
}

const MIN_DELTA: f64 = 1e-6;

/// Cap the cusp `m_r e^{-t}` at depth `1/delta_r`, with `delta_r <= delta` solved so
/// that the terminal circumference equals `zeta m_r`.
pub fn seifert_cusp_cap(m_r: f64, delta: f64, zeta: f64) -> Result<SeifertCap> {
    if !(m_r > 0.0) {
        return Err(invalid(format!("m_r must be positive, got {m_r}")));
    }
    check_delta(delta)?;
    let zeta_bar = seifert_zeta_bar(delta)?;
    if !(zeta > 0.0 && zeta <= zeta_bar) {
        return Err(LabError::NoSolution {
            requested: zeta,
            lo: 0.0,
            hi: zeta_bar,
        });
    }
    let target = zeta.ln();
    let mut hi = delta;
    let mut lo = delta / 2.0;
    while ln_ratio(lo)? > target {
        hi = lo;
        lo /= 2.0;
        if lo < MIN_DELTA {
            return Err(LabError::NoSolution {
                requested: zeta,
                lo: 0.0,
                hi: zeta_bar,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = ln_ratio(mid)?;
        if (f - target).abs() <= 1e-14 {
            lo = mid;
            hi = mid;
            break;
        }
        if f > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let delta_r = if (ln_ratio(lo)? - target).abs() <= (ln_ratio(hi)? - target).abs() {
        lo
    } else {
        hi
    };
    let (cap_profile, cap) = cusp_cap_profile(1.0, delta_r)?;
    let t_big = 1.0 / delta_r;
    let end = t_big + 2.0 * cap.t_delta;
    let phi = Profile::analytic(
        &format!("seifert_cap(m_r={m_r},delta={delta})"),
        0.0,
        end,
        Piece::Scaled {
            ln_scale: m_r.ln() - t_big,
            shift: t_big,
            inner: Arc::new(cap_profile),
        },
        Tail::Constant {
            from: t_big + cap.plateau_start(),
        },
    )?;
    let terminal_circumference = phi.eval0(end)?;
    Ok(SeifertCap {
        metric: WarpedMetric2D::new(phi, 1.0)?,
        cap,
        m_r,
        delta,
        t_nominal: 1.0 / delta,
        delta_r,
        t_big,
        zeta,
        zeta_bar,
        terminal_circumference,
    })
}

impl SeifertCap {
    /// Volume of the region where the profile departs from `m_r e^{-t}`.
    pub fn cap_region_volume(&self) -> Result<f64> {
        let (_, end) = self.metric.phi().domain();
        cusp_volume(&self.metric, self.t_big - self.cap.eps, end)
    }

    /// `e^{-(1/delta_r - 1)} (t_delta + 1) m_r`.
    pub fn cap_region_bound(&self) -> f64 {
        (-(self.t_big - 1.0)).exp() * (self.cap.t_delta + 1.0) * self.m_r
    }
}
