use minent_core::entropy::{
    critical_exponent, enumerate_free_product, ent_upper_bound_bishop, hyperbolic_ball_volume, minent_target,
    poincare_partial, syllable_lower_bound, tube_series_bound, Element, Factor, FreeGroup, LengthOracle,
    Presentation, Syllable, SyllableWord, DEFAULT_BUDGET,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Reduced words of length exactly `n` in a free group of rank `k`.
fn sphere_size(k: usize, n: u32) -> f64 {
    if n == 0 {
        1.0
    } else {
        2.0 * k as f64 * (2.0 * k as f64 - 1.0).powi(n as i32 - 1)
    }
}

#[test]
fn free_group_spectrum_counts_reduced_words() {
    for k in 1..=3 {
        let sp = FreeGroup::unit(k).spectrum(8.0).unwrap();
        for n in 0..=8u32 {
            let level = sp.levels.iter().find(|l| l.0 == n as f64).map_or(0.0, |l| l.1);
            assert_eq!(level, sphere_size(k, n), "rank {k}, length {n}");
        }
    }
}

#[test]
fn dynamic_spectrum_agrees_with_enumeration_for_mixed_lengths() {
    let g = FreeGroup::new(vec![1.0, 1.5, 0.7]).unwrap();
    let a = g.spectrum(7.0).unwrap();
    let b = g.spectrum_by_enumeration(7.0).unwrap();
    assert_eq!(a.levels.len(), b.levels.len());
    for (x, y) in a.levels.iter().zip(&b.levels) {
        assert!(close(x.0, y.0, 1e-12) && x.1 == y.1, "{x:?} vs {y:?}");
    }
    assert_eq!(g.elements(5.0, DEFAULT_BUDGET).unwrap().len() as f64, a.count(5.0));
}

#[test]
fn free_group_poincare_series_sums_geometrically() {
    // For F_2 the series is 1 + sum 4 * 3^{n-1} e^{-sn}.
    let f2 = LengthOracle::Free(FreeGroup::unit(2));
    let s = 1.5;
    let oracle: f64 = (0..=20).map(|n| sphere_size(2, n) * (-s * n as f64).exp()).sum();
    assert!(close(poincare_partial(&f2, s, 20.0).unwrap(), oracle, 1e-14));
}

#[test]
fn free_group_exponent_is_log_of_branching() {
    for (k, r_max) in [(2usize, 16.0), (3, 12.0)] {
        let e = critical_exponent(&LengthOracle::Free(FreeGroup::unit(k)), 1e-3, r_max).unwrap();
        let expected = (2.0 * k as f64 - 1.0).ln();
        assert!((e.slope - expected).abs() < 1e-2, "rank {k}: {}", e.slope);
    }
}

#[test]
fn hyperbolic_growth_exponent_is_dimension_minus_one() {
    for n in [2u32, 3, 4] {
        let e = critical_exponent(&LengthOracle::HyperbolicGrowth { dimension: n }, 1e-3, 40.0).unwrap();
        assert!((e.slope - (n - 1) as f64).abs() < 0.05, "dimension {n}: {}", e.slope);
    }
}

#[test]
fn hyperbolic_ball_volume_matches_quadrature_for_every_dimension() {
    use std::f64::consts::PI;
    // Ball volume is omega_{n-1} times the integral of sinh^{n-1}.
    let r = 1.3f64;
    let h = r / 20_000.0;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        let mut s = f(0.0) + f(r);
        for i in 1..20_000 {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let v2 = 2.0 * PI * simpson(&|x: f64| x.sinh());
    let v3 = 4.0 * PI * simpson(&|x: f64| x.sinh().powi(2));
    let v4 = 2.0 * PI * PI * simpson(&|x: f64| x.sinh().powi(3));
    assert!(close(hyperbolic_ball_volume(2, r).unwrap(), v2, 1e-12));
    assert!(close(hyperbolic_ball_volume(3, r).unwrap(), v3, 1e-12));
    assert!(close(hyperbolic_ball_volume(4, r).unwrap(), v4, 1e-12));
}

#[test]
fn z2_balls_are_diamonds() {
    let z2 = LengthOracle::Presented(Presentation::z2());
    for n in 0..=10 {
        let count = z2.count(n as f64).unwrap();
        let diamond = 2.0 * (n * n + n) as f64 + 1.0;
        assert_eq!(count, diamond, "radius {n}");
    }
    let e = critical_exponent(&z2, 1e-3, 30.0).unwrap();
    assert!(e.slope < 0.2, "{}", e.slope);
}

#[test]
fn entropy_bounds() {
    assert_eq!(ent_upper_bound_bishop(0.0, 3).unwrap(), 2.0);
    let v = [2.029883212819307, 3.663862376708876];
    let t = minent_target(&v).unwrap();
    assert!(close(t.powi(3), 8.0 * (v[0] + v[1]), 1e-14));
}

#[test]
fn syllable_words_reject_interior_identities() {
    let a = Syllable::new(Factor::First, "a", 1.0);
    let b = Syllable::new(Factor::Second, "b", 2.0);
    let w = SyllableWord::new(vec![Syllable::identity(Factor::First), b.clone(), a.clone()]).unwrap();
    assert_eq!(syllable_lower_bound(&w, 0.5).unwrap(), 3.0 + 3.0);
    assert!(SyllableWord::new(vec![a.clone(), Syllable::identity(Factor::Second), a.clone()]).is_err());
    assert!(SyllableWord::new(vec![a.clone(), a]).is_err());
}

#[test]
fn padded_enumeration_of_z2_star_z2_counts_pairs() {
    // Z/2 * Z/2 with unit syllable lengths: one nontrivial element per factor, so
    // every pair count k gives four padded words (ends trivial or not), except that
    // the all-trivial word with one pair is the identity and is not listed.
    let f = vec![Element { id: "e".into(), length: 0.0 }, Element { id: "a".into(), length: 1.0 }];
    let l = 1.0;
    let e = enumerate_free_product(&f, &f, l, 30.0, DEFAULT_BUDGET).unwrap();
    assert!(!e.truncated);
    for k in 1..=e.complete_pairs {
        let mut got: Vec<f64> = e
            .words
            .iter()
            .filter(|(w, _)| w.syllables.len() == 2 * k)
            .map(|(_, len)| *len)
            .collect();
        let base = 4.0 * l * k as f64 + 2.0 * k as f64;
        let expected = [base - 2.0, base - 1.0, base - 1.0, base];
        let skip = usize::from(k == 1);
        let within: Vec<f64> = expected[skip..].iter().copied().filter(|&x| x <= 30.0).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, within, "pairs {k}");
    }
}

proptest! {
    #[test]
    fn tube_bound_is_finite_exactly_above_threshold(p1 in 1.0f64..50.0, p2 in 1.0f64..50.0, s in 0.1f64..3.0, l in 0.01f64..5.0) {
        let b = tube_series_bound(|_| p1, |_| p2, l, s).unwrap();
        prop_assert!(close(b.q, p1 * p2 * (-4.0 * s * l).exp(), 1e-14));
        let above = l > b.threshold_l * (1.0 + 1e-12);
        let below = l < b.threshold_l * (1.0 - 1e-12);
        if above { prop_assert!(b.bound.is_some()); }
        if below { prop_assert!(b.bound.is_none()); }
        if let Some(x) = b.bound {
            prop_assert!(close(x, (1.0 + 3.0 * b.q) / (1.0 - b.q), 1e-12));
        }
    }

    #[test]
    fn rescaling_scales_the_exponent(lambda in 0.5f64..4.0) {
        let base = LengthOracle::Free(FreeGroup::unit(2));
        let a = critical_exponent(&base, 1e-3, 12.0).unwrap();
        let b = critical_exponent(&base.clone().rescaled(lambda).unwrap(), 1e-3, 12.0 * lambda).unwrap();
        prop_assert!(close(a.slope, lambda * b.slope, 1e-9));
    }
}
