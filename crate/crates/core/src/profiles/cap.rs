//! Exponential, ODE and capped cusp profiles.

use super::corner::smooth_corner;
use super::{Piece, Profile, Segment, Side, Smoothness, Tail, WindowOrder};
use crate::error::{invalid, precondition, Result};

/// Constants of a capped cusp profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapParameters {
    pub delta: f64,
    /// Half-width of the window at 0.
    pub eps: f64,
    /// Half-width of the window at `t_delta`.
    pub eps_prime: f64,
    /// Minimum location of the ODE profile.
    pub t_delta: f64,
    pub ell: f64,
    /// Terminal constant value.
    pub ell_prime: f64,
}

impl CapParameters {
    /// Admissible interval for `ell_prime`.
    pub fn ell_prime_bounds(ell: f64, delta: f64) -> (f64, f64) {
        let base = ell * (delta * (1.0 + delta)).sqrt() / (1.0 + 2.0 * delta);
        (base, 4.0 * base)
    }

    /// Check the recorded invariants.
    pub fn check(&self) -> Result<()> {
        let t = ode_min_location(self.delta);
        if (t - self.t_delta).abs() > 1e-12 * t.max(1.0) {
            return Err(precondition(format!(
                "t_delta = {} but expected {t}",
                self.t_delta
            )));
        }
        let (lo, hi) = Self::ell_prime_bounds(self.ell, self.delta);
        if self.ell_prime < lo || self.ell_prime > hi {
            return Err(precondition(format!(
                "ell' = {} outside [{lo}, {hi}]",
                self.ell_prime
            )));
        }
        Ok(())
    }

    /// Point after which the profile is constant.
    pub fn plateau_start(&self) -> f64 {
        self.t_delta + self.eps_prime
    }
}

fn check_ell(ell: f64) -> Result<()> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(invalid(format!("ell must be positive, got {ell}")));
    }
    Ok(())
}

/// `ell e^{-t}` on the whole line.
pub fn exp_profile(ell: f64) -> Result<Profile> {
    check_ell(ell)?;
    Profile::analytic(
        &format!("exp(ell={ell})"),
        f64::NEG_INFINITY,
        f64::INFINITY,
        Piece::Exp {
            ln_amp: ell.ln(),
            rate: 1.0,
        },
        Tail::Exponential {
            from: f64::NEG_INFINITY,
            rate: 1.0,
        },
    )
}

fn ode_piece(ell: f64, delta: f64) -> Piece {
    let k = 1.0 + 2.0 * delta;
    Piece::TwoExp {
        a: ell * (1.0 + delta) / k,
        b: ell * delta / k,
        k,
    }
}

/// Solution of `phi'' = (1+2 delta)^2 phi` with `phi(0) = ell`, `phi'(0) = -ell`.
pub fn ode_profile(ell: f64, delta: f64) -> Result<Profile> {
    check_ell(ell)?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("delta must be positive, got {delta}")));
    }
    Profile::analytic(
        &format!("ode(ell={ell},delta={delta})"),
        f64::NEG_INFINITY,
        f64::INFINITY,
        ode_piece(ell, delta),
        Tail::Open,
    )
}

/// `ln(1 + 1/delta) / (2 (1 + 2 delta))`.
pub fn ode_min_location(delta: f64) -> f64 {
    (1.0 / delta).ln_1p() / (2.0 * (1.0 + 2.0 * delta))
}

/// `2 ell sqrt(delta (1 + delta)) / (1 + 2 delta)`.
pub fn ode_min_value(ell: f64, delta: f64) -> f64 {
    2.0 * ell * (delta * (1.0 + delta)).sqrt() / (1.0 + 2.0 * delta)
}

/// Uniform scan of the cap bounds. Returns the first violation.
pub(crate) fn scan_cap(profile: &Profile, params: &CapParameters, per_unit: usize) -> Result<()> {
    let k2 = (1.0 + 2.0 * params.delta).powi(2);
    let lo = -params.eps - 0.5;
    let hi = params.plateau_start() + 0.5;
    let n = ((hi - lo) * per_unit as f64).ceil() as usize;
    let mut pts: Vec<(f64, Side)> = (0..=n)
        .map(|i| (lo + (hi - lo) * i as f64 / n as f64, Side::Right))
        .collect();
    for &b in profile.breakpoints() {
        pts.push((b, Side::Left));
        pts.push((b, Side::Right));
    }
    for (t, side) in pts {
        let j = profile.eval_side(t, side)?;
        let slope2 = (j.d1 / j.value).powi(2);
        let curv = j.d2 / j.value;
        let bad = j.value <= 0.0
            || j.d1 > 1e-12
            || j.d2 < -1e-10
            || slope2 > k2 + 1e-9
            || curv > k2 + 1e-9;
        if bad {
            return Err(precondition(format!(
                "cap bounds fail at t = {t}: value {}, d1 {}, d2 {}",
                j.value, j.d1, j.d2
            )));
        }
    }
    Ok(())
}

const MAX_HALVINGS: usize = 40;

/// Capped cusp profile and the constants it achieved.
///
/// `ell e^{-t}` for `t <= -eps`, the ODE solution in the middle, constant `ell'`
/// for `t >= t_delta + eps'`; both corners are C² smoothed. The profile is
/// nonincreasing and convex with `(phi'/phi)^2` and `phi''/phi` at most `(1+2 delta)^2`.
pub fn cusp_cap_profile(ell: f64, delta: f64) -> Result<(Profile, CapParameters)> {
    build_cap(ell, delta, true)
}

pub(crate) fn build_cap(ell: f64, delta: f64, scan: bool) -> Result<(Profile, CapParameters)> {
    check_ell(ell)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    let t_delta = ode_min_location(delta);
    let floor = ode_min_value(ell, delta);
    let base = Profile::from_segments(
        &format!("cusp_cap(ell={ell},delta={delta})"),
        vec![
            Segment::new(
                f64::NEG_INFINITY,
                0.0,
                Piece::Exp {
                    ln_amp: ell.ln(),
                    rate: 1.0,
                },
            ),
            Segment::new(0.0, t_delta, ode_piece(ell, delta)),
            Segment::new(t_delta, f64::INFINITY, Piece::constant(floor)),
        ],
        Tail::Open,
    )?;
    let eps = (delta / 10.0).min(0.01 * t_delta);
    let first = smooth_corner(&base, 0.0, eps, WindowOrder::Second, Tail::Open)?
        .ok_or_else(|| precondition("no corner at 0"))?;
    let c1 = first.offset;
    let ode = ode_piece(ell, delta);
    let mut eps_prime = eps;
    for _ in 0..=MAX_HALVINGS {
        let tail = Tail::Constant {
            from: t_delta + eps_prime,
        };
        let second = smooth_corner(
            &first.profile,
            t_delta,
            eps_prime,
            WindowOrder::Second,
            tail,
        )?
        .ok_or_else(|| precondition("no corner at t_delta"))?;
        let ell_prime = floor + c1 + second.offset;
        // Right of the first window the profile is the ODE solution plus c1 > 0, so
        // both ratio bounds reduce to the ODE value at the second window's start.
        let entry = ode.jet(t_delta - eps_prime, Side::Right).value;
        if entry <= ell_prime {
            let params = CapParameters {
                delta,
                eps,
                eps_prime,
                t_delta,
                ell,
                ell_prime,
            };
            let profile = second.profile.with_smoothness(Smoothness::C2);
            if !scan || scan_cap(&profile, &params, 10_000).is_ok() {
                params.check()?;
                return Ok((profile, params));
            }
        }
        eps_prime /= 2.0;
    }
    Err(precondition(format!(
        "no admissible eps' after {MAX_HALVINGS} halvings for delta = {delta}"
    )))
}
