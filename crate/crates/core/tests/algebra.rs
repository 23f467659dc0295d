use proptest::prelude::*;
use subsig_core::blade::{rotation_lift, supertrace, BladePair, CliffordElement};
use subsig_core::matrix_rep::{oracle_supertrace, pullback_lift, rep};
use subsig_core::random::{exact_element, float_element, trial_rng};
use subsig_core::scalar::{Complex64, GaussQ, Scalar};

fn pair(seed: u64, n: usize) -> (CliffordElement<GaussQ>, CliffordElement<GaussQ>) {
    let mut rng = trial_rng(seed, n as u64);
    (exact_element(&mut rng, n, 5), exact_element(&mut rng, n, 5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rep_is_multiplicative(seed in any::<u64>(), n in 1usize..=5) {
        let (x, y) = pair(seed, n);
        let lhs = rep(&x.checked_mul(&y).unwrap()).unwrap();
        let rhs = rep(&x).unwrap().mul(&rep(&y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_is_associative(seed in any::<u64>(), n in 1usize..=5) {
        let (x, y) = pair(seed, n);
        let z = exact_element(&mut trial_rng(seed ^ 0x5a5a, 0), n, 4);
        let left = x.checked_mul(&y).unwrap().checked_mul(&z).unwrap();
        let right = x.checked_mul(&y.checked_mul(&z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn supertrace_kills_supercommutators(seed in any::<u64>(), n in 1usize..=5) {
        let (x, y) = pair(seed, n);
        let s = x.supercommutator(&y).unwrap();
        prop_assert!(supertrace(&s).is_zero());
        prop_assert!(oracle_supertrace(&s).unwrap().is_zero());
    }

    #[test]
    fn float_supertrace_matches_oracle(seed in any::<u64>(), n in 1usize..=6) {
        let x = float_element(&mut trial_rng(seed, 1), n, 8);
        let d = (supertrace(&x) - oracle_supertrace(&x).unwrap()).norm();
        prop_assert!(d < 1e-12, "difference {d}");
    }

    #[test]
    fn lift_matches_pullback_with_fixed_planes(seed in any::<u64>(), planes in 1usize..=3, fixed in 0usize..=1) {
        let mut rng = trial_rng(seed, 2);
        let angles = subsig_core::random::angles(&mut rng, planes, 0.0);
        let (n, a) = (2 * (planes + fixed), 2 * fixed);
        let lift = rep(&rotation_lift::<Complex64>(&angles, n, a).unwrap()).unwrap();
        let pull = pullback_lift::<Complex64>(&angles, n, a).unwrap();
        prop_assert!(lift.max_diff(&pull).unwrap() < 1e-12);
    }
}

#[test]
fn full_word_values() {
    for (n, expect) in [(1, -2), (2, -4), (3, 8), (4, 16), (5, -32)] {
        let full = (1u32 << n) - 1;
        let x = CliffordElement::<GaussQ>::blade(n, BladePair::new(full, full), GaussQ::one()).unwrap();
        assert_eq!(supertrace(&x), GaussQ::from_i64(expect), "n = {n}");
        assert_eq!(oracle_supertrace(&x).unwrap(), GaussQ::from_i64(expect), "n = {n}");
    }
}

#[test]
fn generators_square_to_signs() {
    for n in 1..=4 {
        for i in 1..=n {
            let c = CliffordElement::<GaussQ>::c(n, i).unwrap();
            let h = CliffordElement::<GaussQ>::chat(n, i).unwrap();
            assert_eq!(c.checked_mul(&c).unwrap(), CliffordElement::scalar(n, GaussQ::from_i64(-1)));
            assert_eq!(h.checked_mul(&h).unwrap(), CliffordElement::one(n));
        }
    }
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let x = CliffordElement::<GaussQ>::c(2, 1).unwrap();
    let y = CliffordElement::<GaussQ>::c(3, 1).unwrap();
    assert!(x.checked_mul(&y).is_err());
    assert!(CliffordElement::<GaussQ>::c(2, 3).is_err());
}
