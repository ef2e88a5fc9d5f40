//! The smooth step used to blend between warping profiles.
//!
//! `bump(u) = e^{-1/(1-u)} / (e^{-1/(1-u)} + e^{-1/u})` on (0, 1), equal to 1 for
//! `u <= 0` and 0 for `u >= 1`. Written as a logistic in `w = 1/(1-u) - 1/u` so it
//! never forms the tiny exponentials explicitly.

use super::Jet;

/// Largest value of `bump''` on (0, 1), from a uniform scan of `BUMP_SCAN_POINTS` points.
pub const BUMP_D2_MAX: f64 = 9.841042301810244;
/// Smallest value of `bump''` on (0, 1), same scan.
pub const BUMP_D2_MIN: f64 = -9.841042301810262;
/// Resolution of the scan that produced the two constants above.
pub const BUMP_SCAN_POINTS: usize = 1_000_000;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Value of the step at `u`.
pub fn bump(u: f64) -> f64 {
    bump_jet(u).value
}

/// Value and first two derivatives of the step at `u`.
pub fn bump_jet(u: f64) -> Jet {
    if u <= 0.0 {
        return Jet::new(1.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return Jet::new(0.0, 0.0, 0.0);
    }
    let v = 1.0 - u;
    let w = 1.0 / v - 1.0 / u;
    let b = logistic(-w);
    let nb = logistic(w);
    let bb = b * nb;
    if bb == 0.0 {
        return Jet::new(b, 0.0, 0.0);
    }
    let w1 = 1.0 / (v * v) + 1.0 / (u * u);
    let w2 = 2.0 / (v * v * v) - 2.0 / (u * u * u);
    let d1 = -bb * w1;
    let d2 = -((1.0 - 2.0 * b) * d1 * w1 + bb * w2);
    Jet::new(b, d1, d2)
}

/// Recompute the extremes of `bump''` on a uniform grid of `n` interior points,
/// returned as `(max, min)`.
pub fn scan_bump_d2(n: usize) -> (f64, f64) {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 1..n {
        let d2 = bump_jet(i as f64 / n as f64).d2;
        hi = hi.max(d2);
        lo = lo.min(d2);
    }
    (hi, lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus_and_midpoint() {
        assert_eq!(bump(-3.0), 1.0);
        assert_eq!(bump(7.0), 0.0);
        assert!((bump(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn matches_direct_formula() {
        for &u in &[0.1, 0.3, 0.62, 0.9] {
            let a = (-1.0f64 / (1.0 - u)).exp();
            let b = (-1.0f64 / u).exp();
            assert!((bump(u) - a / (a + b)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for i in 1..50 {
            let u = i as f64 / 50.0;
            let j = bump_jet(u);
            let fd1 = (bump(u + h) - bump(u - h)) / (2.0 * h);
            let fd2 = (bump_jet(u + h).d1 - bump_jet(u - h).d1) / (2.0 * h);
            assert!((j.d1 - fd1).abs() < 1e-7, "u={u}");
            assert!((j.d2 - fd2).abs() < 1e-6, "u={u}");
        }
    }

    #[test]
    fn frozen_constants_reproduce() {
        let (hi, lo) = scan_bump_d2(BUMP_SCAN_POINTS);
        assert!((hi - BUMP_D2_MAX).abs() < 1e-9);
        assert!((lo - BUMP_D2_MIN).abs() < 1e-9);
    }

    #[test]
    fn nonincreasing() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = bump(i as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn tiny_arguments_stay_finite() {
        for &u in &[1e-300, 1e-12, 1.0 - 1e-16] {
            let j = bump_jet(u);
            assert!(j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite());
        }
    }
}
