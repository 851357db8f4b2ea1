use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use rsqrt_forge::fp::{self, BinaryFloat};

const DRAWS: usize = 1_000_000;

fn check_pattern<F: BinaryFloat>(x: F) {
    if x.is_nan() || !x.is_finite() {
        return;
    }
    if x != F::ZERO {
        let parts = fp::decompose(x).unwrap();
        assert_eq!(parts.recompose::<F>().to_bits_u64(), x.to_bits_u64());

        let mag = if x < F::ZERO { -x } else { x };
        let up = fp::next_up(mag);
        if up.is_finite() {
            assert_eq!(fp::ulp_of(x).unwrap(), up - mag, "ulp of {x:?}");
        }
    }
    let up = fp::next_up(x);
    if up.is_finite() && up != F::ZERO && x != F::ZERO {
        assert_eq!(fp::ulp_distance(x, up).unwrap(), 1);
        assert_eq!(fp::next_down(up).to_bits_u64(), x.to_bits_u64());
    }
}

fn run<F: BinaryFloat>(mask: u64, seed: u64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut prev = F::ONE;
    for _ in 0..DRAWS {
        let x = F::from_bits_u64(rng.next_u64() & mask);
        check_pattern(x);
        if x.is_finite() && prev.is_finite() {
            let same_side = (x >= F::ZERO) == (prev >= F::ZERO) || x == F::ZERO || prev == F::ZERO;
            if same_side {
                assert_eq!(fp::ulp_distance(x, prev).unwrap(), fp::ulp_distance(prev, x).unwrap());
            } else {
                assert!(fp::ulp_distance(x, prev).is_err());
            }
        }
        prev = x;
    }
}

#[test]
fn random_binary64_patterns() {
    run::<f64>(u64::MAX, 1);
}

#[test]
fn random_binary32_patterns() {
    run::<f32>(u32::MAX as u64, 2);
}

#[test]
fn distance_counts_floats_across_binades() {
    assert_eq!(fp::ulp_distance(1.0f64, 2.0).unwrap(), 1 << 52);
    assert_eq!(fp::ulp_distance(0.0f64, f64::MIN_POSITIVE).unwrap(), 1 << 52);
    assert_eq!(fp::ulp_distance(-0.0f32, 0.0).unwrap(), 0);
    assert_eq!(fp::ulp_distance(1.0f32, 4.0).unwrap(), 1 << 24);
}
