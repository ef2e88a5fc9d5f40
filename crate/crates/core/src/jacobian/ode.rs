//! Dormand–Prince 5(4) integrator for small autonomous-in-piece systems.

use crate::error::{invalid, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Accepted-step statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate `y' = f(t, y)` from `t0` to `t1`, calling `observe` after every accepted step.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    t1: f64,
    y0: [f64; N],
    tol: f64,
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Result<([f64; N], StepStats)> {
    if !(t1 >= t0) {
        return Err(invalid(format!("integration interval [{t0}, {t1}] is inverted")));
    }
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    if t1 == t0 {
        return Ok((y, stats));
    }
    let mut h = (0.01 * (t1 - t0)).max(1e-6).min(t1 - t0);
    let mut k = [[0.0; N]; 7];
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        k[0] = f(t, &y);
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                ys[i] += h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            y_new[i] += h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>();
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            return Err(invalid("integration produced a non-finite value"));
        }
        if err <= 1.0 {
            t = if t1 - (t + h) <= 1e-15 * t1.abs().max(1.0) { t1 } else { t + h };
            y = y_new;
            stats.accepted += 1;
            observe(t, &y);
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * (t1 - t0) {
            return Err(invalid("integration step underflow"));
        }
    }
    Ok((y, stats))
}
