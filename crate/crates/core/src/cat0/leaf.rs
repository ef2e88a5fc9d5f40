//! Model leaves: Euclidean plane, hyperbolic plane (Poincaré disk), segment or ray.
//!
//! Tangent vectors are expressed in an orthonormal frame at their base point. For the
//! disk this frame is the coordinate frame rescaled by the conformal factor, so the
//! Möbius map sending `x` to 0 carries it to the standard frame at 0 without rotation.

use crate::error::{LabError, Result};

/// Geometry of a leaf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Leaf {
    Euclidean,
    /// Curvature −1, unit-disk model.
    Hyperbolic,
    /// `[0, length]`, or `[0, inf)` when `length` is `None`; uses the first coordinate.
    Ray { length: Option<f64> },
}

type P = [f64; 2];

fn cmul(a: P, b: P) -> P {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn conj(a: P) -> P {
    [a[0], -a[1]]
}

fn cdiv(a: P, b: P) -> P {
    let n = b[0] * b[0] + b[1] * b[1];
    let c = cmul(a, conj(b));
    [c[0] / n, c[1] / n]
}

fn norm(a: P) -> f64 {
    a[0].hypot(a[1])
}

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}

fn add(a: P, b: P) -> P {
    [a[0] + b[0], a[1] + b[1]]
}

fn scale(a: P, s: f64) -> P {
    [a[0] * s, a[1] * s]
}

/// `(z - x) / (1 - conj(x) z)`: disk isometry sending `x` to 0.
fn to_origin(x: P, z: P) -> P {
    cdiv(sub(z, x), sub([1.0, 0.0], cmul(conj(x), z)))
}

/// `(z + x) / (1 + conj(x) z)`: inverse of [`to_origin`].
fn from_origin(x: P, z: P) -> P {
    cdiv(add(z, x), add([1.0, 0.0], cmul(conj(x), z)))
}

impl Leaf {
    pub fn name(&self) -> &'static str {
        match self {
            Leaf::Euclidean => "euclidean",
            Leaf::Hyperbolic => "hyperbolic",
            Leaf::Ray { .. } => "ray",
        }
    }

    /// Whether `p` is a valid chart point.
    pub fn check(&self, p: P) -> Result<()> {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(LabError::InvalidRef(format!("non-finite coordinates {p:?}")));
        }
        match self {
            Leaf::Euclidean => Ok(()),
            Leaf::Hyperbolic => {
                if norm(p) < 1.0 {
                    Ok(())
                } else {
                    Err(LabError::InvalidRef(format!("{p:?} lies outside the unit disk")))
                }
            }
            Leaf::Ray { length } => {
                let hi = length.unwrap_or(f64::INFINITY);
                if p[1] == 0.0 && p[0] >= 0.0 && p[0] <= hi {
                    Ok(())
                } else {
                    Err(LabError::InvalidRef(format!("{p:?} is not a point of [0, {hi}] x {{0}}")))
                }
            }
        }
    }

    pub fn distance(&self, a: P, b: P) -> f64 {
        match self {
            Leaf::Euclidean => norm(sub(a, b)),
            Leaf::Hyperbolic => {
                let r = norm(to_origin(a, b)).min(1.0);
                2.0 * r.atanh()
            }
            Leaf::Ray { .. } => (a[0] - b[0]).abs(),
        }
    }

    /// Point at fraction `t` along the geodesic from `a` to `b`.
    pub fn geodesic(&self, a: P, b: P, t: f64) -> P {
        match self {
            Leaf::Euclidean | Leaf::Ray { .. } => add(a, scale(sub(b, a), t)),
            Leaf::Hyperbolic => self.exp(a, scale(self.log(a, b), t)),
        }
    }

    /// Initial velocity of the unit-time geodesic from `x` to `p`.
    pub fn log(&self, x: P, p: P) -> P {
        match self {
            Leaf::Euclidean | Leaf::Ray { .. } => sub(p, x),
            Leaf::Hyperbolic => {
                let w = to_origin(x, p);
                let r = norm(w);
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                scale(w, 2.0 * r.min(1.0).atanh() / r)
            }
        }
    }

    /// Endpoint of the geodesic from `x` with velocity `v`; rays clamp to their ends.
    pub fn exp(&self, x: P, v: P) -> P {
        match self {
            Leaf::Euclidean => add(x, v),
            Leaf::Ray { length } => {
                [(x[0] + v[0]).max(0.0).min(length.unwrap_or(f64::INFINITY)), 0.0]
            }
            Leaf::Hyperbolic => {
                let s = norm(v);
                if s == 0.0 {
                    return x;
                }
                from_origin(x, scale(v, (0.5 * s).tanh() / s))
            }
        }
    }

    /// Project a tangent vector onto the leaf's tangent directions.
    pub fn restrict(&self, v: P) -> P {
        match self {
            Leaf::Ray { .. } => [v[0], 0.0],
            _ => v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_distance_from_origin() {
        let h = Leaf::Hyperbolic;
        let r: f64 = 0.5;
        assert!((h.distance([0.0, 0.0], [r, 0.0]) - ((1.0 + r) / (1.0 - r)).ln()).abs() < 1e-15);
        assert!(h.check([1.0, 0.0]).is_err());
    }

    #[test]
    fn disk_exp_inverts_log() {
        let h = Leaf::Hyperbolic;
        let (x, p) = ([0.3, -0.4], [-0.6, 0.2]);
        let q = h.exp(x, h.log(x, p));
        assert!(norm(sub(q, p)) < 1e-14);
        assert!((norm(h.log(x, p)) - h.distance(x, p)).abs() < 1e-14);
    }

    #[test]
    fn disk_geodesic_has_constant_speed() {
        let h = Leaf::Hyperbolic;
        let (a, b) = ([0.1, 0.7], [-0.5, -0.3]);
        let d = h.distance(a, b);
        for &t in &[0.1, 0.25, 0.5, 0.9] {
            let m = h.geodesic(a, b, t);
            assert!((h.distance(a, m) - t * d).abs() < 1e-13);
            assert!((h.distance(m, b) - (1.0 - t) * d).abs() < 1e-13);
        }
    }

    #[test]
    fn ray_clamps() {
        let r = Leaf::Ray { length: Some(1.0) };
        assert_eq!(r.exp([0.5, 0.0], [2.0, 0.0]), [1.0, 0.0]);
        assert!(r.check([1.5, 0.0]).is_err());
        assert!(Leaf::Ray { length: None }.check([1e9, 0.0]).is_ok());
    }
}
