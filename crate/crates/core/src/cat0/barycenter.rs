//! Barycenters of finite measures on wedge spaces.
//!
//! Restricted to one leaf `L`, every mass `z` is seen through an anchor: `d(x, z) =
//! d_L(x, a) + k` with `a` the marked point where the path to `z` enters `L`. The
//! Leibniz function on `L` is therefore `F_L(x) = sum w (k + d_L(x, a))^2`, a convex
//! function of `x`. Each leaf is minimized separately and the best leaf wins.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::leaf::Leaf;
use super::wedge::{leibniz, PointRef, PointedMeasure, WedgeSpace};
use crate::error::{LabError, Result};

type P = [f64; 2];

/// Number of random perturbations used by the certificate.
pub const CERTIFICATE_SAMPLES: usize = 1000;

const MAX_ITERATIONS: usize = 100_000;
const CERTIFICATE_SEED: u64 = 0x6261_7279;

/// Solver output.
#[derive(Clone, Debug, PartialEq)]
pub struct Barycenter {
    pub point: PointRef,
    /// `B_mu` at `point`.
    pub value: f64,
    /// `max_x d(b, x)^2 mu(X) - (B(x) - B(b))` over the validation samples.
    pub certificate: f64,
    pub iterations: usize,
    /// Whether `certificate <= tol`.
    pub certified: bool,
}

impl Barycenter {
    /// Report block with the point, value, certificate and iteration count.
    pub fn report(&self) -> String {
        format!(
            "{{ leaf: {}, coords: [{:.12}, {:.12}], value: {:.12e}, certificate: {:.3e}, iterations: {}, certified: {} }}",
            self.point.leaf,
            self.point.coords[0],
            self.point.coords[1],
            self.value,
            self.certificate,
            self.iterations,
            self.certified
        )
    }
}

struct Term {
    anchor: P,
    offset: f64,
    weight: f64,
}

fn leaf_terms(space: &WedgeSpace, mu: &PointedMeasure, leaf: usize) -> Vec<Term> {
    mu.masses
        .iter()
        .map(|(z, w)| {
            let (anchor, offset) = space.anchor(leaf, z);
            Term { anchor, offset, weight: *w }
        })
        .collect()
}

fn leaf_value(leaf: &Leaf, terms: &[Term], x: P) -> f64 {
    terms
        .iter()
        .map(|t| {
            let r = t.offset + leaf.distance(x, t.anchor);
            t.weight * r * r
        })
        .sum()
}

/// Minimize on a segment or ray: the smallest `s` where the right derivative is `>= 0`.
fn minimize_ray(hi_len: Option<f64>, terms: &[Term]) -> (P, usize) {
    let right_derivative = |s: f64| -> f64 {
        terms
            .iter()
            .map(|t| {
                let a = t.anchor[0];
                let sign = if s >= a { 1.0 } else { -1.0 };
                2.0 * t.weight * (t.offset + (s - a).abs()) * sign
            })
            .sum()
    };
    if right_derivative(0.0) >= 0.0 {
        return ([0.0, 0.0], 0);
    }
    let far = terms.iter().map(|t| t.anchor[0]).fold(0.0, f64::max) + 1.0;
    let mut hi = hi_len.map_or(far, |l| l.min(far));
    if right_derivative(hi) < 0.0 {
        return ([hi, 0.0], 0);
    }
    let mut lo = 0.0;
    let mut it = 0;
    while it < 200 {
        it += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if right_derivative(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // The minimizer can sit exactly at an anchor; prefer it when it does.
    let best = terms
        .iter()
        .map(|t| t.anchor[0])
        .filter(|&a| a >= lo && a <= hi)
        .chain([hi])
        .next()
        .unwrap_or(hi);
    ([best, 0.0], it)
}

/// Gradient of the terms that are smooth at `x`, and the total subgradient radius of
/// the terms with positive offset anchored exactly at `x`.
fn split_gradient(leaf: &Leaf, terms: &[Term], x: P) -> (P, f64) {
    let mut g = [0.0, 0.0];
    let mut radius = 0.0;
    for t in terms {
        let d = leaf.distance(x, t.anchor);
        if d == 0.0 {
            if t.offset > 0.0 {
                radius += 2.0 * t.weight * t.offset;
            }
            continue;
        }
        let v = leaf.log(x, t.anchor);
        let f = 2.0 * t.weight * (t.offset + d) / d;
        g[0] -= f * v[0];
        g[1] -= f * v[1];
    }
    (g, radius)
}

/// Minimize on a two-dimensional leaf by majorize-minimize steps.
/// Returns the last iterate, the iteration count and whether a stopping rule fired.
fn minimize_plane(leaf: &Leaf, terms: &[Term], start: P) -> (P, usize, bool) {
    // A kink at an anchor is a minimizer when the smooth gradient fits in the subgradient ball.
    for t in terms.iter().filter(|t| t.offset > 0.0) {
        let (g, radius) = split_gradient(leaf, terms, t.anchor);
        if g[0].hypot(g[1]) <= radius {
            return (t.anchor, 0, true);
        }
    }
    let mut x = start;
    let mut fx = leaf_value(leaf, terms, x);
    let scale: f64 = terms.iter().map(|t| t.weight * (t.offset + 1.0)).sum();
    for it in 1..=MAX_ITERATIONS {
        let mut num = [0.0, 0.0];
        let mut den = 0.0;
        for t in terms {
            let d = leaf.distance(x, t.anchor);
            let omega = if d == 0.0 {
                if t.offset > 0.0 {
                    continue;
                }
                t.weight
            } else {
                t.weight * (t.offset + d) / d
            };
            let v = leaf.log(x, t.anchor);
            num[0] += omega * v[0];
            num[1] += omega * v[1];
            den += omega;
        }
        if den == 0.0 {
            return (x, it, true);
        }
        let mut step = [num[0] / den, num[1] / den];
        let grad = 2.0 * den * step[0].hypot(step[1]);
        if grad <= 1e-14 * scale {
            return (x, it, true);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let y = leaf.exp(x, step);
            if leaf.check(y).is_ok() {
                let fy = leaf_value(leaf, terms, y);
                // Near the minimum, values agree to rounding; allow that much increase.
                if fy <= fx + 4.0 * f64::EPSILON * fx.abs() {
                    let moved = leaf.distance(x, y);
                    x = y;
                    fx = fy.min(fx);
                    accepted = true;
                    if moved <= 1e-15 * (1.0 + x[0].hypot(x[1])) {
                        return (x, it, true);
                    }
                    break;
                }
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        if !accepted {
            return (x, it, true);
        }
    }
    (x, MAX_ITERATIONS, false)
}

/// Certificate `max_x d(b, x)^2 mu(X) - (B(x) - B(b))` over masses, hubs and
/// [`CERTIFICATE_SAMPLES`] seeded perturbations of `b` at scales 0.01, 0.1 and 1.
pub fn certificate(space: &WedgeSpace, mu: &PointedMeasure, b: &PointRef) -> Result<f64> {
    let bb = leibniz(space, mu, b)?;
    let total = mu.total_mass();
    let mut samples: Vec<PointRef> = mu.masses.iter().map(|m| m.0).collect();
    samples.extend(space.hub_points());
    let mut rng = ChaCha8Rng::seed_from_u64(CERTIFICATE_SEED);
    let scales = [0.01, 0.1, 1.0];
    for i in 0..CERTIFICATE_SAMPLES {
        samples.push(space.perturb(b, &mut rng, scales[i % 3]));
    }
    let mut worst = f64::NEG_INFINITY;
    for x in &samples {
        let d = space.distance(b, x)?;
        let gap = d * d * total - (leibniz(space, mu, x)? - bb);
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Barycenter of `mu`, with default starting points.
pub fn barycenter(space: &WedgeSpace, mu: &PointedMeasure, tol: f64) -> Result<Barycenter> {
    solve(space, mu, tol, None)
}

/// Barycenter of `mu`, starting every leaf search from the projection of `start`.
pub fn barycenter_from(
    space: &WedgeSpace,
    mu: &PointedMeasure,
    tol: f64,
    start: &PointRef,
) -> Result<Barycenter> {
    space.check(start)?;
    solve(space, mu, tol, Some(start))
}

fn solve(space: &WedgeSpace, mu: &PointedMeasure, tol: f64, start: Option<&PointRef>) -> Result<Barycenter> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    for (z, _) in &mu.masses {
        space.check(z)?;
    }
    let mut best: Option<(PointRef, f64)> = None;
    let mut iterations = 0;
    for (l, leaf) in space.leaves().iter().enumerate() {
        let terms = leaf_terms(space, mu, l);
        let (x, it) = match leaf {
            Leaf::Ray { length } => minimize_ray(*length, &terms),
            _ => {
                let x0 = match start {
                    Some(s) if s.leaf == l => s.coords,
                    Some(s) => space.anchor(l, s).0,
                    None => terms
                        .iter()
                        .min_by(|a, b| a.offset.total_cmp(&b.offset))
                        .map_or([0.0, 0.0], |t| t.anchor),
                };
                let (x, it, done) = minimize_plane(leaf, &terms, x0);
                if !done {
                    let c = certificate(space, mu, &PointRef { leaf: l, coords: x })?;
                    return Err(LabError::NonConvergence { iterations: it, certificate: c });
                }
                (x, it)
            }
        };
        iterations += it;
        let p = PointRef { leaf: l, coords: x };
        let v = leibniz(space, mu, &p)?;
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((p, v));
        }
    }
    let (point, value) = best.expect("at least one leaf");
    let certificate = certificate(space, mu, &point)?;
    Ok(Barycenter { point, value, certificate, iterations, certified: certificate <= tol })
}
