use statrs::distribution::{ChiSquared, ContinuousCDF};

use rsqrt_forge::harness::Sampler;

fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

fn binned(lo: f64, hi: f64, bins: usize, n: u64, seed: u64) -> Vec<u64> {
    let sampler = Sampler::new(lo, hi, seed).unwrap();
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for i in 0..n {
        let x: f64 = sampler.sample(i);
        assert!(x >= lo && x < hi);
        counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
    }
    counts
}

#[test]
fn uniform_within_a_binade() {
    let n = 200_000;
    let counts = binned(1.0, 2.0, 64, n, 42);
    let expected = vec![n as f64 / 64.0; 64];
    let p = chi_square_p(&counts, &expected);
    assert!(p > 1e-6, "p = {p}");
}

#[test]
fn uniform_across_binades() {
    // Equal-width bins over [1/2, 4) straddle three binades of different spacing.
    let n = 200_000;
    let counts = binned(0.5, 4.0, 56, n, 7);
    let expected = vec![n as f64 / 56.0; 56];
    let p = chi_square_p(&counts, &expected);
    assert!(p > 1e-6, "p = {p}");
}

#[test]
fn uniform_in_binary32() {
    let n = 100_000u64;
    let sampler = Sampler::new(1.0f32, 4.0, 3).unwrap();
    let mut counts = vec![0u64; 30];
    for i in 0..n {
        let x: f32 = sampler.sample(i);
        counts[(((x - 1.0) / 0.1) as usize).min(29)] += 1;
    }
    let p = chi_square_p(&counts, &vec![n as f64 / 30.0; 30]);
    assert!(p > 1e-6, "p = {p}");
}
