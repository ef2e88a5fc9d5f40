use minent_core::jacobian::{
    algebraic_bound, algebraic_max, ii_lower_bound, jacobi_ii, jacobian_bound, jacobian_chain_check,
    jacobian_sweep, phi_of_spectrum, random_contract_schedule, CurvatureSchedule, SpectrumPoint,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn simplex_search_finds_the_uniform_maximum() {
    for n in 3..=5 {
        let m = algebraic_max(n, 100_000, 11).unwrap();
        assert!(m.max_found <= algebraic_bound(n) + 1e-9, "n={n}: {} > {}", m.max_found, m.bound);
        assert!(m.best_sample <= algebraic_bound(n) + 1e-9);
        assert!(m.distance_to_uniform() <= 1e-4, "n={n}: argmax {:?}", m.argmax);
        assert!((phi_of_spectrum(&SpectrumPoint::uniform(n)) - algebraic_bound(n)).abs() <= 1e-15);
    }
}

#[test]
fn hyperbolic_jacobi_field_matches_coth() {
    for k in 1..=100 {
        let t = 0.1 * k as f64;
        let s = CurvatureSchedule::constant(-1.0, t).unwrap();
        let ii = jacobi_ii(&s, 0.0, 1.0).unwrap().ii_at_ell;
        let exact = 1.0 / t.tanh();
        assert!((ii - exact).abs() <= 1e-8, "t={t}: {ii} vs {exact}");
    }
}

#[test]
fn profile_tracks_the_closed_form() {
    let s = CurvatureSchedule::constant(-1.0, 4.0).unwrap();
    let p = jacobi_ii(&s, 0.0, 1.0).unwrap();
    for sample in p.samples.iter().filter(|s| s.t > 0.0) {
        assert!((sample.j - sample.t.sinh()).abs() <= 1e-9 * sample.t.cosh());
        assert!((sample.ii.unwrap() - 1.0 / sample.t.tanh()).abs() <= 1e-8);
    }
}

#[test]
fn second_fundamental_form_bound_on_random_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let (s, r, jp) = random_contract_schedule(&mut rng).unwrap();
        let tail = s.hyperbolic_tail().unwrap();
        assert!(tail >= r - 1e-12);
        let ii = jacobi_ii(&s, 0.0, jp).unwrap().ii_at_ell;
        assert!(ii >= ii_lower_bound(r) - 1e-8, "R={r}: {ii} < {}", ii_lower_bound(r));
    }
}

#[test]
fn flat_prefix_example() {
    let s = CurvatureSchedule::new(vec![2.0], vec![0.0, -1.0], 5.0).unwrap();
    assert_eq!(s.hyperbolic_tail(), Some(3.0));
    let ii = jacobi_ii(&s, 0.0, 1.0).unwrap().ii_at_ell;
    assert!(ii >= 1.0 - 2.0 * (-6.0f64).exp());
}

#[test]
fn positive_prefix_breaks_the_contract() {
    let s = CurvatureSchedule::new(vec![1.0], vec![0.5, -1.0], 3.0).unwrap();
    assert_eq!(s.hyperbolic_tail(), None);
}

#[test]
fn chain_check_monte_carlo() {
    let rows = jacobian_sweep(2024, &[3, 4, 5], &[2.0, 2.5, 3.0], &[0.0, 0.1], 100_000).unwrap();
    assert_eq!(rows.len(), 1_800_000);
    assert!(rows.iter().all(|r| r.ok));
    let again = jacobian_sweep(2024, &[3], &[2.0], &[0.0], 10).unwrap();
    assert_eq!(again[..], rows[..10]);
}

#[test]
fn bound_examples() {
    assert!((jacobian_bound(2.0, 3, 0.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(jacobian_chain_check(&SpectrumPoint::uniform(3), 2.0, 0.0).unwrap());
}

proptest! {
    #[test]
    fn phi_is_permutation_invariant(raw in prop::collection::vec(0.01f64..1.0, 3..7), seed in any::<u64>()) {
        let s: f64 = raw.iter().sum();
        let h: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let Ok(p) = SpectrumPoint::new(h.clone()) else { return Ok(()); };
        let mut shuffled = h;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        let q = SpectrumPoint::new(shuffled).unwrap();
        prop_assert_eq!(phi_of_spectrum(&p), phi_of_spectrum(&q));
    }

    #[test]
    fn phi_never_exceeds_the_bound(seed in any::<u64>(), n in 3usize..7) {
        let p = SpectrumPoint::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(phi_of_spectrum(&p) <= algebraic_bound(n) + 1e-9);
    }
}
