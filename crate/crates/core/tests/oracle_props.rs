use std::cmp::Ordering;

use proptest::prelude::*;

use rsqrt_forge::algos::{self, AlgorithmId};
use rsqrt_forge::fp;
use rsqrt_forge::oracle::{self, CandidateClass};

fn positive_f64() -> impl Strategy<Value = f64> {
    (1u64..0x7ff0_0000_0000_0000).prop_map(f64::from_bits)
}

fn positive_f32() -> impl Strategy<Value = f32> {
    (1u32..0x7f80_0000).prop_map(f32::from_bits)
}

/// True value strictly inside `y`'s rounding interval.
fn brackets(y: f64, x: f64) -> bool {
    let (low, high) = oracle::midpoints(y);
    oracle::compare_to_rsqrt(&low, x) == Ordering::Less
        && oracle::compare_to_rsqrt(&high, x) == Ordering::Greater
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn oracle_is_bracketed(x in positive_f64()) {
        let y = oracle::oracle_rsqrt(x).unwrap();
        prop_assert!(brackets(y, x));
    }

    #[test]
    fn oracle_scales_by_powers_of_four(x in 1.0f64..4.0, k in -500i32..500) {
        let scaled = x * fp::pow2::<f64>(2 * k).unwrap();
        let y = oracle::oracle_rsqrt(x).unwrap();
        prop_assert_eq!(oracle::oracle_rsqrt(scaled).unwrap(), y * fp::pow2::<f64>(-k).unwrap());
    }

    #[test]
    fn two_steps_up_is_unfaithful(x in positive_f64()) {
        let y = oracle::oracle_rsqrt(x).unwrap();
        let far = fp::next_up(fp::next_up(y));
        prop_assume!(far.is_finite());
        prop_assert_eq!(oracle::classify(far, x).unwrap().class, CandidateClass::Unfaithful(2));
    }

    #[test]
    fn neighbours_of_the_oracle_are_faithful_on_one_side(x in positive_f64()) {
        let y = oracle::oracle_rsqrt(x).unwrap();
        let up = oracle::classify(fp::next_up(y), x).unwrap().class;
        let down = oracle::classify(fp::next_down(y), x).unwrap().class;
        let faithful = [up, down].iter().filter(|c| c.is_faithful()).count();
        prop_assert_eq!(faithful, 1);
    }

    #[test]
    fn newton_and_halley_are_weakly_rounded_everywhere(x in positive_f64()) {
        for id in [AlgorithmId::Newton, AlgorithmId::Halley] {
            let y = algos::rsqrt_full_range(x, id).unwrap();
            let v = oracle::classify(y, x).unwrap();
            prop_assert!(v.ulp_distance <= 1 && (v.ulp_distance == 0 || v.class.is_faithful()), "{id} at {x:e}: {v:?}");
        }
    }

    #[test]
    fn binary32_oracle_is_bracketed(x in positive_f32()) {
        let y = oracle::oracle_rsqrt(x).unwrap();
        let (low, high) = oracle::midpoints(y);
        prop_assert_eq!(oracle::compare_to_rsqrt(&low, x), Ordering::Less);
        prop_assert_eq!(oracle::compare_to_rsqrt(&high, x), Ordering::Greater);
    }
}

/// Binary32 oracle against the double-rounded `(1/sqrt(x as f64)) as f32`.
/// Disagreements are allowed only where double rounding can strike, and the
/// sign test must side with the oracle.
#[test]
fn binary32_agrees_with_wide_rounding_on_1_2() {
    let mut disagreements = 0;
    let mut x = 1.0f32;
    while x < 2.0 {
        let y = oracle::oracle_rsqrt(x).unwrap();
        let wide = (1.0 / (x as f64).sqrt()) as f32;
        if wide != y {
            disagreements += 1;
            assert_eq!(fp::ulp_distance(wide, y).unwrap(), 1);
            let (low, high) = oracle::midpoints(y);
            assert_eq!(oracle::compare_to_rsqrt(&low, x), Ordering::Less, "x = {x:e}");
            assert_eq!(oracle::compare_to_rsqrt(&high, x), Ordering::Greater, "x = {x:e}");
        }
        x = fp::next_up(x);
    }
    assert!(disagreements < 64, "{disagreements} disagreements");
}

#[test]
fn subnormal_and_extreme_inputs() {
    for x in [f64::from_bits(1), f64::MIN_POSITIVE, f64::MAX, 0.25, 4.0] {
        let y = oracle::oracle_rsqrt(x).unwrap();
        assert!(brackets(y, x), "x = {x:e}");
    }
    assert_eq!(oracle::oracle_rsqrt(f64::from_bits(1)).unwrap(), 2f64.powi(537));
    assert_eq!(oracle::oracle_rsqrt(0.25f64).unwrap(), 2.0);
    assert!(oracle::oracle_rsqrt(0.0f64).is_err());
    assert!(oracle::oracle_rsqrt(-1.0f64).is_err());
    assert!(oracle::oracle_rsqrt(f64::NAN).is_err());
}
