use minent_core::cat0::{
    barycenter, barycenter_from, comparison_check, comparison_sides, euclid_median_identity, fixtures,
    leibniz, Leaf, PointRef, PointedMeasure, WedgeSpace,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn all_fixtures() -> Vec<(&'static str, WedgeSpace)> {
    fixtures::NAMES.iter().map(|&n| (n, fixtures::by_name(n).unwrap())).collect()
}

fn sample(space: &WedgeSpace, rng: &mut ChaCha8Rng) -> PointRef {
    let scale = [0.5, 2.0, 5.0][rng.gen_range(0..3)];
    space.random_point(rng, scale)
}

#[test]
fn distance_is_a_metric_on_every_fixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (name, x) in all_fixtures() {
        for _ in 0..10_000 {
            let (a, b, c) = (sample(&x, &mut rng), sample(&x, &mut rng), sample(&x, &mut rng));
            let ab = x.distance(&a, &b).unwrap();
            let ba = x.distance(&b, &a).unwrap();
            let bc = x.distance(&b, &c).unwrap();
            let ac = x.distance(&a, &c).unwrap();
            assert!(ab >= 0.0 && x.distance(&a, &a).unwrap() == 0.0);
            assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab), "{name}: symmetry");
            assert!(ac <= ab + bc + 1e-9, "{name}: triangle {ac} > {ab} + {bc}");
        }
    }
}

#[test]
fn geodesics_have_constant_speed() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (name, x) in all_fixtures() {
        for _ in 0..20 {
            let (a, b) = (sample(&x, &mut rng), sample(&x, &mut rng));
            let d = x.distance(&a, &b).unwrap();
            assert_eq!(x.geodesic(&a, &b, 0.0).unwrap(), a);
            assert!(x.distance(&x.geodesic(&a, &b, 1.0).unwrap(), &b).unwrap() <= 1e-12 * (1.0 + d));
            for _ in 0..100 {
                let t: f64 = rng.gen();
                let m = x.geodesic(&a, &b, t).unwrap();
                let am = x.distance(&a, &m).unwrap();
                let mb = x.distance(&m, &b).unwrap();
                assert!((am - t * d).abs() <= 1e-9 * (1.0 + d), "{name}: {am} vs {}", t * d);
                assert!((am + mb - d).abs() <= 1e-9 * (1.0 + d), "{name}: off the geodesic");
            }
        }
    }
}

#[test]
fn comparison_inequality_holds_on_every_fixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, x) in all_fixtures() {
        for _ in 0..10_000 {
            let (a, b, c) = (sample(&x, &mut rng), sample(&x, &mut rng), sample(&x, &mut rng));
            let t: f64 = rng.gen();
            let s = comparison_sides(&x, &a, &b, &c, t).unwrap();
            assert!(s.holds, "{name}: {} > {}", s.lhs, s.rhs);
        }
    }
}

#[test]
fn hyperbolic_triangles_are_strictly_thin() {
    let x = fixtures::hyperbolic_plane();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let (a, b, c) = (sample(&x, &mut rng), sample(&x, &mut rng), sample(&x, &mut rng));
        let t = rng.gen_range(0.05..0.95);
        if x.distance(&a, &b).unwrap() < 0.1 || x.distance(&a, &c).unwrap() < 0.1 || x.distance(&b, &c).unwrap() < 0.1 {
            continue;
        }
        let s = comparison_sides(&x, &a, &b, &c, t).unwrap();
        assert!(s.lhs < s.rhs, "{} !< {}", s.lhs, s.rhs);
    }
}

#[test]
fn degenerate_base_is_trivially_true() {
    let x = fixtures::tripod(None);
    let b = PointRef::new(1, 0.5, 0.0);
    assert!(comparison_check(&x, &PointRef::new(0, 2.0, 0.0), &b, &b, 0.3).unwrap());
}

#[test]
fn chain_distance_is_additive() {
    let x = fixtures::chain(2.0);
    let d = x.distance(&PointRef::new(0, 1.0, 0.0), &PointRef::new(2, 0.0, 1.0)).unwrap();
    assert_eq!(d, 4.0);
}

fn fixture_measures(rng: &mut ChaCha8Rng) -> Vec<(&'static str, WedgeSpace, PointedMeasure)> {
    let mut out = Vec::new();
    for (name, x) in all_fixtures() {
        for _ in 0..4 {
            let n = rng.gen_range(1..7);
            let masses = (0..n).map(|_| (sample(&x, rng), rng.gen_range(0.1..3.0))).collect();
            out.push((name, x.clone(), PointedMeasure::new(masses).unwrap()));
        }
    }
    out
}

#[test]
fn barycenter_certificate_on_fixture_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, x, mu) in fixture_measures(&mut rng) {
        let b = barycenter(&x, &mu, TOL).unwrap();
        assert!(b.certified, "{name}: {}", b.report());
        assert!(b.value <= leibniz(&x, &mu, &b.point).unwrap() + 1e-12);
    }
}

#[test]
fn barycenter_restarts_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (name, x, mu) in fixture_measures(&mut rng) {
        let b0 = barycenter(&x, &mu, TOL).unwrap();
        for _ in 0..3 {
            let start = sample(&x, &mut rng);
            let b1 = barycenter_from(&x, &mu, TOL, &start).unwrap();
            let gap = x.distance(&b0.point, &b1.point).unwrap();
            assert!(gap <= 10.0 * TOL, "{name}: restarts differ by {gap}");
        }
    }
}

fn rigid(p: [f64; 2], angle: f64, shift: [f64; 2]) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1] + shift[0], s * p[0] + c * p[1] + shift[1]]
}

#[test]
fn barycenter_is_equivariant_under_isometries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // A single plane admits every rigid motion.
    let plane = fixtures::euclidean_plane();
    // On two glued planes, rotations of one leaf about the hub are isometries.
    let two = fixtures::two_planes();
    for _ in 0..50 {
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let shift = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let masses: Vec<(PointRef, f64)> =
            (0..5).map(|_| (sample(&plane, &mut rng), rng.gen_range(0.1..2.0))).collect();
        let moved: Vec<(PointRef, f64)> =
            masses.iter().map(|(p, w)| (PointRef { leaf: 0, coords: rigid(p.coords, angle, shift) }, *w)).collect();
        let b = barycenter(&plane, &PointedMeasure::new(masses).unwrap(), TOL).unwrap();
        let bm = barycenter(&plane, &PointedMeasure::new(moved).unwrap(), TOL).unwrap();
        let image = PointRef { leaf: 0, coords: rigid(b.point.coords, angle, shift) };
        assert!(plane.distance(&image, &bm.point).unwrap() <= 10.0 * TOL);

        let masses: Vec<(PointRef, f64)> =
            (0..5).map(|_| (sample(&two, &mut rng), rng.gen_range(0.1..2.0))).collect();
        let spin = |p: &PointRef| {
            if p.leaf == 1 {
                PointRef { leaf: 1, coords: rigid(p.coords, angle, [0.0, 0.0]) }
            } else {
                *p
            }
        };
        let moved: Vec<(PointRef, f64)> = masses.iter().map(|(p, w)| (spin(p), *w)).collect();
        let b = barycenter(&two, &PointedMeasure::new(masses).unwrap(), TOL).unwrap();
        let bm = barycenter(&two, &PointedMeasure::new(moved).unwrap(), TOL).unwrap();
        assert!(two.distance(&spin(&b.point), &bm.point).unwrap() <= 10.0 * TOL);
    }
}

#[test]
fn mixed_segments_and_planes() {
    let x = WedgeSpace::new(
        vec![Leaf::Euclidean, Leaf::Ray { length: Some(2.0) }, Leaf::Hyperbolic],
        vec![
            minent_core::cat0::Hub { incidences: vec![(0, [1.0, 0.0]), (1, [0.0, 0.0])] },
            minent_core::cat0::Hub { incidences: vec![(1, [2.0, 0.0]), (2, [0.2, 0.1])] },
        ],
    )
    .unwrap();
    let mu = PointedMeasure::new(vec![
        (PointRef::new(0, -1.0, 0.5), 1.0),
        (PointRef::new(2, -0.4, 0.3), 2.5),
        (PointRef::new(1, 0.7, 0.0), 0.3),
    ])
    .unwrap();
    let b = barycenter(&x, &mu, TOL).unwrap();
    assert!(b.certified, "{}", b.report());
}

proptest! {
    #[test]
    fn median_identity_is_exact(
        a in prop::array::uniform2(-10.0f64..10.0),
        b in prop::array::uniform2(-10.0f64..10.0),
        c in prop::array::uniform2(-10.0f64..10.0),
        t in 0.0f64..1.0,
    ) {
        prop_assume!((b[0] - c[0]).hypot(b[1] - c[1]) > 1e-3);
        let m = [b[0] + t * (c[0] - b[0]), b[1] + t * (c[1] - b[1])];
        let (lhs, rhs) = euclid_median_identity(a, b, c, m).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn median_identity_at_endpoint(a in prop::array::uniform2(-5.0f64..5.0), b in prop::array::uniform2(-5.0f64..5.0)) {
        let c = [b[0] + 1.0, b[1]];
        let (lhs, rhs) = euclid_median_identity(a, b, c, b).unwrap();
        let ab2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        prop_assert!((lhs - ab2).abs() <= 1e-12 * (1.0 + ab2));
        prop_assert!((rhs - ab2).abs() <= 1e-12 * (1.0 + ab2));
    }

    #[test]
    fn leibniz_translates_with_the_measure(
        pts in prop::collection::vec((prop::array::uniform2(-5.0f64..5.0), 0.1f64..3.0), 1..6),
        x in prop::array::uniform2(-5.0f64..5.0),
        v in prop::array::uniform2(-5.0f64..5.0),
    ) {
        let plane = fixtures::euclidean_plane();
        let shift = |p: [f64; 2]| PointRef::new(0, p[0] + v[0], p[1] + v[1]);
        let mu = PointedMeasure::new(pts.iter().map(|&(p, w)| (PointRef::new(0, p[0], p[1]), w)).collect()).unwrap();
        let moved = PointedMeasure::new(pts.iter().map(|&(p, w)| (shift(p), w)).collect()).unwrap();
        let b0 = leibniz(&plane, &mu, &PointRef::new(0, x[0], x[1])).unwrap();
        let b1 = leibniz(&plane, &moved, &shift(x)).unwrap();
        prop_assert!((b0 - b1).abs() <= 1e-10 * (1.0 + b0));
    }
}
