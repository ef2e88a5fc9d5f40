//! Corner smoothing inside a window `[at - eps, at + eps]`.
//!
//! For a kink of order one (value continuous, slope jumps) the window is a C¹
//! interpolant; for order two (slope continuous, second derivative jumps) it is C².
//! In both cases the derivative of the smoothed quantity runs monotonically from
//! its left to its right window value, so the sandwich bounds hold by construction.

use super::{Jet, Piece, Profile, Side, Smoothness, Step, Tail, Window, WindowOrder};
use crate::error::{invalid, precondition, Result};

pub(crate) struct Smoothed {
    pub profile: Profile,
    /// Constant added to the profile right of the window.
    pub offset: f64,
    pub window: Window,
}

fn scale(j: &Jet) -> f64 {
    j.value.abs().max(j.d1.abs()).max(j.d2.abs()).max(1.0)
}

/// Replace `phi` on `[at - eps, at + eps]` by a smoothing window.
///
/// Returns `None` when there is no corner at `at` to smooth.
pub(crate) fn smooth_corner(
    phi: &Profile,
    at: f64,
    eps: f64,
    order: WindowOrder,
    tail: Tail,
) -> Result<Option<Smoothed>> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!(
            "window half-width must be positive, got {eps}"
        )));
    }
    let (lo, hi) = (at - eps, at + eps);
    let (dlo, dhi) = phi.domain();
    if lo < dlo || hi > dhi {
        return Err(precondition(format!(
            "window [{lo}, {hi}] leaves the domain [{dlo}, {dhi}]"
        )));
    }
    if phi
        .breakpoints()
        .iter()
        .any(|&b| b > lo && b < hi && b != at)
    {
        return Err(precondition(format!(
            "another breakpoint lies inside the window around {at}"
        )));
    }
    let left = phi.eval_side(lo, Side::Left)?;
    let right = phi.eval_side(hi, Side::Right)?;
    let w = 2.0 * eps;
    let (a, b, rise, v0, s0) = match order {
        WindowOrder::First => (left.d1, right.d1, right.value - left.value, left.value, 0.0),
        WindowOrder::Second => (left.d2, right.d2, right.d1 - left.d1, left.value, left.d1),
    };
    let tol = 1e-13 * scale(&left).max(scale(&right));
    if (b - a).abs() <= tol {
        if (rise - a * w).abs() <= tol * w.max(1.0) * 10.0 {
            return Ok(None);
        }
        return Err(precondition(format!(
            "no corner to smooth at {at} but the window increment does not match"
        )));
    }
    let mean = (rise / w - a) / (b - a);
    if !(mean > 0.0 && mean < 1.0) {
        return Err(precondition(format!(
            "window of half-width {eps} at {at} cannot be bridged monotonically (mean {mean})"
        )));
    }
    let window = Window {
        origin: lo,
        width: w,
        v0,
        s0,
        a,
        b,
        step: Step::with_mean(mean),
        order,
    };
    let end = window.jet(hi);
    let offset = end.value - right.value;
    let offset = match order {
        WindowOrder::Second => offset,
        WindowOrder::First => {
            if offset.abs() > 1e-12 * scale(&right) {
                return Err(precondition(format!(
                    "window misses the right value by {offset}"
                )));
            }
            0.0
        }
    };
    let profile = phi.splice(lo, hi, Piece::Window(window.clone()), offset, tail)?;
    Ok(Some(Smoothed {
        profile,
        offset,
        window,
    }))
}

fn corner_jets(phi: &Profile) -> Result<(Jet, Jet)> {
    let (lo, hi) = phi.domain();
    if !(lo < 0.0 && hi > 0.0) {
        return Err(precondition(
            "the corner at 0 must be interior to the domain",
        ));
    }
    Ok((
        phi.eval_side(0.0, Side::Left)?,
        phi.eval_side(0.0, Side::Right)?,
    ))
}

fn upgrade(p: Profile, s: Smoothness) -> Profile {
    let level = p.smoothness();
    if level >= s {
        p
    } else {
        p.with_smoothness(s)
    }
}

/// C¹ interpolation of a function `Phi` with a convex kink at 0.
///
/// Outside `(-eps, eps)` the result equals `phi`; inside, its slope lies between
/// `Phi'(-eps)` and `Phi'(eps)`, and `|int_{-eps}^{eps} Phi_eps| <= 2 M eps`.
pub fn c1_interpolate(phi: &Profile, eps: f64, m: f64) -> Result<Profile> {
    if !(m >= 0.0) {
        return Err(invalid(format!("bound M must be nonnegative, got {m}")));
    }
    let (l, r) = corner_jets(phi)?;
    if (l.value - r.value).abs() > 1e-10 * l.value.abs().max(1.0) {
        return Err(precondition("Phi must be continuous at 0"));
    }
    if l.value.abs() > m * (1.0 + 1e-12) {
        return Err(precondition(format!(
            "|Phi(0)| = {} exceeds M = {m}",
            l.value.abs()
        )));
    }
    if r.d1 < l.d1 {
        return Err(precondition(format!(
            "slope must not decrease across 0 (left {}, right {})",
            l.d1, r.d1
        )));
    }
    let tail = phi.tail();
    let Some(s) = smooth_corner(phi, 0.0, eps, WindowOrder::First, tail)? else {
        return Ok(phi.clone());
    };
    let w = s.window.width;
    let integral = s.window.v0 * w
        + 0.5 * s.window.a * w * w
        + (s.window.b - s.window.a) * w * w * s.window.step.double_integral();
    if integral.abs() > 2.0 * m * eps * (1.0 + 1e-12) {
        return Err(precondition(format!(
            "integral over the window is {integral}, above 2 M eps = {}",
            2.0 * m * eps
        )));
    }
    Ok(upgrade(s.profile, Smoothness::C1))
}

/// C² flattening of a convex `phi` whose second derivative jumps up at 0.
///
/// The result equals `phi` for `t <= -eps` and `phi + c` for `t >= eps` with
/// `|c| <= 4 M eps`; inside the window both derivatives stay between their
/// window-end values.
pub fn c2_flatten(phi: &Profile, eps: f64, m: f64) -> Result<Profile> {
    c2_flatten_with_offset(phi, eps, m).map(|(p, _)| p)
}

/// As [`c2_flatten`], also returning the offset `c`.
pub(crate) fn c2_flatten_with_offset(phi: &Profile, eps: f64, m: f64) -> Result<(Profile, f64)> {
    if !(m >= 0.0) {
        return Err(invalid(format!("bound M must be nonnegative, got {m}")));
    }
    let (l, r) = corner_jets(phi)?;
    let s = l.d1.abs().max(1.0);
    if (l.value - r.value).abs() > 1e-10 * l.value.abs().max(1.0) || (l.d1 - r.d1).abs() > 1e-10 * s
    {
        return Err(precondition("phi must be C1 at 0"));
    }
    if l.d1.abs() > m * (1.0 + 1e-12) {
        return Err(precondition(format!(
            "|phi'(0)| = {} exceeds M = {m}",
            l.d1.abs()
        )));
    }
    if r.d2 < l.d2 {
        return Err(precondition(format!(
            "second derivative must not drop across 0 (left {}, right {})",
            l.d2, r.d2
        )));
    }
    let (lo, hi) = phi.domain();
    if -eps >= lo && eps <= hi {
        for i in 0..=100 {
            let t = -eps + 2.0 * eps * i as f64 / 100.0;
            let d2 = phi
                .eval_side(t, Side::Left)?
                .d2
                .min(phi.eval_side(t, Side::Right)?.d2);
            if d2 < -1e-12 {
                return Err(precondition(format!(
                    "phi is not convex near 0 (phi''({t}) = {d2})"
                )));
            }
        }
    }
    let tail = phi.tail();
    let Some(sm) = smooth_corner(phi, 0.0, eps, WindowOrder::Second, tail)? else {
        return Ok((phi.clone(), 0.0));
    };
    let bound = 4.0 * m * eps;
    if sm.offset.abs() > bound * (1.0 + 1e-12) {
        return Err(precondition(format!(
            "offset {} exceeds 4 M eps = {bound}; shrink eps",
            sm.offset
        )));
    }
    for i in 0..=200 {
        let t = -eps + 2.0 * eps * i as f64 / 200.0;
        let gap = (sm.profile.eval(t)?.value - phi.eval(t)?.value).abs();
        if gap > bound * (1.0 + 1e-12) {
            return Err(precondition(format!(
                "|phi_eps - phi| = {gap} exceeds {bound} at {t}"
            )));
        }
    }
    Ok((upgrade(sm.profile, Smoothness::C2), sm.offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::Segment;

    fn abs() -> Profile {
        Profile::from_segments(
            "abs",
            vec![
                Segment::new(
                    -1.0,
                    0.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![0.0, -1.0],
                    },
                ),
                Segment::new(
                    0.0,
                    1.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![0.0, 1.0],
                    },
                ),
            ],
            Tail::Open,
        )
        .unwrap()
    }

    fn half_parabola() -> Profile {
        Profile::from_segments(
            "half_parabola",
            vec![
                Segment::new(-1.0, 0.0, Piece::constant(1.0)),
                Segment::new(
                    0.0,
                    1.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![1.0, 0.0, 0.5],
                    },
                ),
            ],
            Tail::Open,
        )
        .unwrap()
    }

    #[test]
    fn abs_becomes_parabola_inside_window() {
        let p = c1_interpolate(&abs(), 0.1, 1.0).unwrap();
        assert_eq!(p.smoothness(), Smoothness::C1);
        for &t in &[-0.1, -0.05, 0.0, 0.03, 0.1] {
            let v = p.eval(t).unwrap().value;
            assert!((v - (t * t / 0.2 + 0.05)).abs() < 1e-15, "t={t}");
        }
        assert_eq!(p.eval(0.5).unwrap().value, 0.5);
        assert_eq!(p.eval(-0.2).unwrap().d1, -1.0);
    }

    #[test]
    fn zero_jump_is_identity() {
        let flat = Profile::analytic("zero", -1.0, 1.0, Piece::constant(0.0), Tail::Open).unwrap();
        let p = c1_interpolate(&flat, 0.1, 0.0).unwrap();
        assert_eq!(p.eval(0.05).unwrap().value, 0.0);
    }

    #[test]
    fn c1_rejects_large_value() {
        let shifted = Profile::from_segments(
            "abs_plus_two",
            vec![
                Segment::new(
                    -1.0,
                    0.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![2.0, -1.0],
                    },
                ),
                Segment::new(
                    0.0,
                    1.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![2.0, 1.0],
                    },
                ),
            ],
            Tail::Open,
        )
        .unwrap();
        assert!(c1_interpolate(&shifted, 0.1, 1.0).is_err());
    }

    #[test]
    fn c2_window_second_derivative_in_unit_interval() {
        let (p, c) = c2_flatten_with_offset(&half_parabola(), 0.05, 1.0).unwrap();
        assert_eq!(p.smoothness(), Smoothness::C2);
        assert!(c.abs() <= 4.0 * 0.05);
        for i in 0..=1000 {
            let t = -0.05 + 0.1 * i as f64 / 1000.0;
            let d2 = p.eval(t).unwrap().d2;
            assert!((-1e-15..=1.0 + 1e-15).contains(&d2));
        }
    }

    #[test]
    fn c2_untouched_left_of_window() {
        let base = half_parabola();
        let p = c2_flatten(&base, 0.01, 1.0).unwrap();
        assert_eq!(p.eval(-0.02).unwrap(), base.eval(-0.02).unwrap());
    }

    #[test]
    fn c2_rejects_downward_jump() {
        let p = Profile::from_segments(
            "cap",
            vec![
                Segment::new(
                    -1.0,
                    0.0,
                    Piece::Poly {
                        origin: 0.0,
                        coeffs: vec![1.0, 0.0, 0.5],
                    },
                ),
                Segment::new(0.0, 1.0, Piece::constant(1.0)),
            ],
            Tail::Open,
        )
        .unwrap();
        assert!(c2_flatten(&p, 0.05, 1.0).is_err());
    }
}
