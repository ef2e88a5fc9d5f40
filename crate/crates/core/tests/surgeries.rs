use minent_core::surgery::{
    conformal_change, conformal_constant, hyperbolic_flatten, leeb_compatibility, orbifold_euler, seifert_cusp_cap,
    seifert_zeta_bar, tube_metric, unit_sphere_area, SeifertFibrationData, TorusCuspSpec, TubeSpec, MAX_TUBE_RADIUS,
};
use minent_core::warped::{curvature_scan_with_tolerance, sectional_curvatures_3d, WarpedMetric};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn conformal_cusp_is_hyperbolic_before_the_blend() {
    let spec = TorusCuspSpec::new(0.3, 0.7, 1.0, 1.0).unwrap();
    let delta = 0.2;
    let m = conformal_change(&spec, delta).unwrap();
    assert!(close(m.t_big, conformal_constant(0.3, 0.7) / delta, 1e-15));
    for i in 0..=50 {
        let t = m.t_big * i as f64 / 50.0;
        assert!(close(m.metric.eta_a().eval0(t).unwrap(), (-t).exp(), 1e-13), "t = {t}");
        assert!(close(m.metric.eta_b().eval0(t).unwrap(), (-t).exp(), 1e-13), "t = {t}");
        for s in sectional_curvatures_3d(&m.metric, t).unwrap() {
            assert!((s + 1.0).abs() < 1e-9, "t = {t}: {s}");
        }
    }
}

#[test]
fn conformal_blend_stays_within_the_pinching_band() {
    let spec = TorusCuspSpec::new(0.3, 0.7, 1.0, 1.0).unwrap();
    for delta in [0.5, 0.2, 0.1] {
        let m = conformal_change(&spec, delta).unwrap();
        let r = curvature_scan_with_tolerance(&m.metric, (m.t_big, 2.0 * m.t_big), 4000, (-1.0 - delta, -1.0), 1e-6)
            .unwrap();
        assert!(r.verdict, "delta {delta}: worst excess {} at {}", r.worst_excess, r.worst_t);
        let r = curvature_scan_with_tolerance(&m.metric, (2.0 * m.t_big, 3.0 * m.t_big), 500, (-1.0, -1.0), 1e-6)
            .unwrap();
        assert!(r.verdict, "delta {delta}");
    }
}

#[test]
fn flattened_cusp_is_nonpositively_curved_and_flat_at_the_end() {
    let spec = TorusCuspSpec::new(0.3, 0.7, 1.0, 1.0).unwrap();
    let delta = 0.2;
    let c = conformal_change(&spec, delta).unwrap();
    let f = hyperbolic_flatten(&c, delta).unwrap();
    let k2 = (1.0 + 2.0 * delta).powi(2);
    let (_, end) = f.metric.domain();
    let r = curvature_scan_with_tolerance(&f.metric, (0.0, end), 20_000, (-k2, 0.0), 1e-9).unwrap();
    assert!(r.verdict, "worst excess {} at {}", r.worst_excess, r.worst_t);
    let r = curvature_scan_with_tolerance(&f.metric, f.collar, 500, (0.0, 0.0), 1e-10).unwrap();
    assert!(r.verdict, "worst excess {} at {}", r.worst_excess, r.worst_t);
    let v = f.volume_report(4000).unwrap();
    assert!(v.within_bound(), "{} > {}", v.difference.ln_abs(), v.ln_bound_total);
}

#[test]
fn tube_has_round_middle_and_bounded_volume() {
    let spec = TubeSpec { half_length: 2.0, radius: 0.2, end_radii: (0.5, 0.7), dimension: 3 };
    let (_, d) = tube_metric(spec).unwrap();
    assert!(close(d.middle_diameter, std::f64::consts::PI * 0.2, 1e-12));
    assert!(d.max_slice_slope <= 1e-12);
    assert!(d.volume <= d.volume_bound);
    let too_wide = TubeSpec { radius: MAX_TUBE_RADIUS * 1.01, ..spec };
    assert!(tube_metric(too_wide).is_err());
}

#[test]
fn unit_sphere_areas() {
    use std::f64::consts::PI;
    assert!(close(unit_sphere_area(1), 2.0 * PI, 1e-15));
    assert!(close(unit_sphere_area(2), 4.0 * PI, 1e-15));
    assert!(close(unit_sphere_area(3), 2.0 * PI * PI, 1e-14));
}

#[test]
fn orbifold_euler_characteristics() {
    // Disc with cone points 2 and 3: 1 - 1/2 - 2/3.
    assert!(close(orbifold_euler(0, 1, &[2, 3]).unwrap(), -1.0 / 6.0, 1e-15));
    // Once-punctured torus.
    assert_eq!(orbifold_euler(1, 1, &[]).unwrap(), -1.0);
    // Moebius band: one crosscap, one boundary circle.
    assert_eq!(orbifold_euler(-1, 1, &[]).unwrap(), 0.0);
    assert!(orbifold_euler(0, 1, &[1]).is_err());
}

#[test]
fn boundary_products_compatibility() {
    // e = 1/2 + 1/3, so the second products must sum to -5/6 of the fibre norm.
    let ok = SeifertFibrationData::new(0, vec![(2, 1), (3, 1)], vec![(1.0, -0.5), (1.0, -1.0 / 3.0)]).unwrap();
    assert!(leeb_compatibility(&ok).unwrap());
    let bad_sum = SeifertFibrationData::new(0, vec![(2, 1), (3, 1)], vec![(1.0, -0.5), (1.0, -0.3)]).unwrap();
    assert!(!leeb_compatibility(&bad_sum).unwrap());
    let bad_norm = SeifertFibrationData::new(0, vec![(2, 1), (3, 1)], vec![(1.0, -0.5), (2.0, -1.0 / 3.0)]).unwrap();
    assert!(!leeb_compatibility(&bad_norm).unwrap());
    assert!(SeifertFibrationData::new(0, vec![(4, 2)], vec![(1.0, 0.0)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn seifert_cap_hits_its_terminal_circumference(m_r in 0.5f64..3.0, delta in 0.1f64..0.5, frac in 0.2f64..1.0) {
        let zeta = frac * seifert_zeta_bar(delta).unwrap();
        let cap = seifert_cusp_cap(m_r, delta, zeta).unwrap();
        prop_assert!(cap.delta_r <= delta * (1.0 + 1e-12));
        prop_assert!(close(cap.terminal_circumference, zeta * m_r, 1e-8));
        prop_assert!(cap.cap_region_volume().unwrap() <= cap.cap_region_bound());
    }
}
