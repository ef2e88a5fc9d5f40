//! Connected-sum tube `dt² + R(t)² g_round` on `S^{n-1} x [-L-r, L+r]`.
//!
//! The cross-section is the round sphere of radius `r` on `[-L-r/3, L+r/3]`; on
//! the outer collars of width `2r/3` the squared radius is blended with the bump
//! step towards the end radii.

use crate::error::{invalid, Result};
use crate::profiles::{Blend, Piece, Profile, Segment, Side, Tail};
use crate::warped::{cusp_volume, WarpedMetric};

/// Largest admissible sphere radius, `2/(3 pi)`.
pub const MAX_TUBE_RADIUS: f64 = 2.0 / (3.0 * std::f64::consts::PI);

/// Parameters of a tube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeSpec {
    /// Half-length `L` of the round middle.
    pub half_length: f64,
    /// Radius `r` of the middle sphere.
    pub radius: f64,
    /// Round radii of the two end cross-sections.
    pub end_radii: (f64, f64),
    /// Total dimension `n >= 3`.
    pub dimension: u32,
}

impl TubeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_length > 0.0) || !self.half_length.is_finite() {
            return Err(invalid(format!(
                "L must be positive, got {}",
                self.half_length
            )));
        }
        if !(self.radius > 0.0) {
            return Err(invalid(format!("r must be positive, got {}", self.radius)));
        }
        if self.radius > MAX_TUBE_RADIUS {
            return Err(invalid(format!(
                "r = {} exceeds 2/(3 pi) = {MAX_TUBE_RADIUS}",
                self.radius
            )));
        }
        let (a, b) = self.end_radii;
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!(
                "end radii must be positive, got ({a}, {b})"
            )));
        }
        if self.dimension < 3 {
            return Err(invalid(format!(
                "dimension must be at least 3, got {}",
                self.dimension
            )));
        }
        Ok(())
    }
}

/// Area of the unit sphere `S^k` in `R^{k+1}`.
pub fn unit_sphere_area(k: u32) -> f64 {
    use std::f64::consts::PI;
    let (mut area, start) = if k.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    let mut j = start;
    while j < k {
        j += 2;
        area *= 2.0 * PI / (j as f64 - 1.0);
    }
    area
}

/// Tube metric with radius profile `R`.
#[derive(Clone, Debug)]
pub struct TubeMetric {
    pub spec: TubeSpec,
    radius: Profile,
}

impl TubeMetric {
    pub fn radius_profile(&self) -> &Profile {
        &self.radius
    }

    fn fibre_dim(&self) -> f64 {
        (self.spec.dimension - 1) as f64
    }
}

impl WarpedMetric for TubeMetric {
    fn profiles(&self) -> Vec<&Profile> {
        vec![&self.radius]
    }

    fn density_factor(&self) -> f64 {
        unit_sphere_area(self.spec.dimension - 1)
    }

    fn plane_names(&self) -> Vec<&'static str> {
        vec!["sigma_radial", "sigma_sphere"]
    }

    fn curvatures(&self, t: f64, side: Side) -> Result<Vec<f64>> {
        let j = self.radius.eval_side(t, side)?;
        Ok(vec![
            -j.d2 / j.value,
            (1.0 - j.d1 * j.d1) / (j.value * j.value),
        ])
    }

    fn ln_density(&self, t: f64, side: Side) -> Result<f64> {
        let r = self.radius.eval_side(t, side)?.value;
        Ok(self.density_factor().ln() + self.fibre_dim() * r.ln())
    }
}

/// Checks on a constructed tube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubeDiagnostics {
    /// Intrinsic diameter `pi r` of a middle cross-section.
    pub middle_diameter: f64,
    /// Largest `|R'|` on `[-L-r/3, L+r/3]`; zero when the slices are totally geodesic.
    pub max_slice_slope: f64,
    pub volume: f64,
    /// Largest cross-section area.
    pub max_area: f64,
    /// `A 2r + omega r^{n-1} (2L + 2r)`.
    pub volume_bound: f64,
}

/// Build the tube metric and its diagnostics.
pub fn tube_metric(spec: TubeSpec) -> Result<(TubeMetric, TubeDiagnostics)> {
    spec.validate()?;
    let (l, r) = (spec.half_length, spec.radius);
    let inner = l + r / 3.0;
    let outer = l + r;
    let profile = Profile::from_segments(
        &format!("tube(L={l},r={r})"),
        vec![
            Segment::new(
                -outer,
                -inner,
                Piece::Blend(Blend {
                    origin: -inner - r / 3.0,
                    width: r / 3.0,
                    r_mid: r,
                    r_end: spec.end_radii.0,
                }),
            ),
            Segment::new(-inner, inner, Piece::constant(r)),
            Segment::new(
                inner,
                outer,
                Piece::Blend(Blend {
                    origin: inner + r / 3.0,
                    width: -r / 3.0,
                    r_mid: r,
                    r_end: spec.end_radii.1,
                }),
            ),
        ],
        Tail::Open,
    )?;
    let metric = TubeMetric {
        spec,
        radius: profile,
    };
    let mut max_slice_slope: f64 = 0.0;
    for i in 0..=1000 {
        let t = -inner + 2.0 * inner * i as f64 / 1000.0;
        max_slice_slope = max_slice_slope.max(metric.radius.eval1(t)?.abs());
    }
    let omega = unit_sphere_area(spec.dimension - 1);
    let n1 = metric.fibre_dim();
    let r_max = r.max(spec.end_radii.0).max(spec.end_radii.1);
    let max_area = omega * r_max.powf(n1);
    let volume = cusp_volume(&metric, -outer, outer)?;
    let volume_bound = max_area * 2.0 * r + omega * r.powf(n1) * (2.0 * l + 2.0 * r);
    let diag = TubeDiagnostics {
        middle_diameter: std::f64::consts::PI * r,
        max_slice_slope,
        volume,
        max_area,
        volume_bound,
    };
    Ok((metric, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(r: f64) -> TubeSpec {
        TubeSpec {
            half_length: 5.0,
            radius: r,
            end_radii: (r.sinh(), r),
            dimension: 3,
        }
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(unit_sphere_area(0), 2.0);
        assert!((unit_sphere_area(1) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn radius_limit() {
        assert!(tube_metric(spec(0.22)).is_err());
        assert!(tube_metric(spec(MAX_TUBE_RADIUS)).is_ok());
    }

    #[test]
    fn middle_is_round_product() {
        let (m, d) = tube_metric(spec(0.1)).unwrap();
        assert_eq!(d.middle_diameter, PI * 0.1);
        assert_eq!(d.max_slice_slope, 0.0);
        let s = m.curvatures(0.0, Side::Right).unwrap();
        assert_eq!(s[0], 0.0);
        assert!((s[1] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn volume_against_round_cylinder_and_bound() {
        let (_, d) = tube_metric(spec(0.1)).unwrap();
        let middle = 4.0 * PI * 0.01 * (10.0 + 0.2 / 3.0);
        assert!(d.volume > middle);
        assert!(d.volume <= d.volume_bound);
        let expected_bound = d.max_area * 0.2 + 4.0 * PI * 0.01 * 10.2;
        assert!((d.volume_bound - expected_bound).abs() < 1e-12);
    }

    #[test]
    fn equal_ends_give_exact_cylinder() {
        let s = TubeSpec {
            half_length: 2.0,
            radius: 0.2,
            end_radii: (0.2, 0.2),
            dimension: 4,
        };
        let (_, d) = tube_metric(s).unwrap();
        let exact = unit_sphere_area(3) * 0.2f64.powi(3) * 2.0 * 2.2;
        assert!((d.volume - exact).abs() < 1e-12 * exact);
    }
}
