//! Reproducible sample streams.
//!
//! Sample `i` of a plan is drawn from ChaCha20 keyed by the little-endian seed
//! (zero padded to 32 bytes), on stream `i`, starting at word 0. A sample
//! therefore depends only on `(seed, i)`, never on how work is split between
//! threads.
//!
//! The distribution is uniform over the reals of `[lo, hi)`, resolved at float
//! granularity: every float in the interval is picked with probability
//! proportional to its spacing. Inside a single binade that is plain uniform
//! choice among the equally spaced floats.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::fp::{self, BinaryFloat};

use super::HarnessError;

/// Identifier recorded in reports so a run can be reproduced elsewhere.
pub const PRNG_ID: &str = "chacha20-le64seed-stream=index";

/// Widest spread of spacings allowed within one interval, as a power of two.
const MAX_SPACING_SPREAD: u32 = 60;

#[derive(Debug, Clone)]
struct Segment {
    start_bits: u64,
    /// Weight of one float in this segment, as a power of two.
    shift: u32,
    /// Cumulative weight of all earlier segments.
    offset: u128,
    weight: u128,
}

#[derive(Debug, Clone)]
pub struct Sampler {
    segments: Vec<Segment>,
    total: u128,
    rng: ChaCha20Rng,
}

impl Sampler {
    /// Builds a sampler over `[lo, hi)` for positive finite `lo < hi`.
    pub fn new<F: BinaryFloat>(lo: F, hi: F, seed: u64) -> Result<Self, HarnessError> {
        if !(lo > F::ZERO && lo < hi && hi.is_finite()) {
            return Err(HarnessError::InvalidPlan(format!(
                "interval [{lo:?}, {hi:?}) must satisfy 0 < lo < hi < inf"
            )));
        }
        let prec = F::PRECISION;
        let mantissa_bits = prec.p() - 1;
        let (start, end) = (lo.to_bits_u64(), hi.to_bits_u64());

        let mut raw = Vec::new();
        let mut cur = start;
        while cur < end {
            let boundary = ((cur >> mantissa_bits) + 1) << mantissa_bits;
            let stop = boundary.min(end);
            let spacing = fp::decompose(F::from_bits_u64(cur)).expect("positive").exponent;
            raw.push((cur, stop - cur, spacing));
            cur = stop;
        }
        let min_spacing = raw.iter().map(|r| r.2).min().expect("nonempty interval");
        let max_spacing = raw.iter().map(|r| r.2).max().expect("nonempty interval");
        if (max_spacing - min_spacing) as u32 > MAX_SPACING_SPREAD {
            return Err(HarnessError::InvalidPlan(format!(
                "interval [{lo:?}, {hi:?}) spans too many binades to sample"
            )));
        }

        let mut segments = Vec::with_capacity(raw.len());
        let mut total: u128 = 0;
        for (start_bits, count, spacing) in raw {
            let shift = (spacing - min_spacing) as u32;
            let weight = (count as u128) << shift;
            segments.push(Segment { start_bits, shift, offset: total, weight });
            total += weight;
        }

        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Ok(Sampler { segments, total, rng: ChaCha20Rng::from_seed(key) })
    }

    /// Number of distinct floats the sampler can produce.
    pub fn population(&self) -> u128 {
        self.segments.iter().map(|s| s.weight >> s.shift).sum()
    }

    /// Uniform integer in `[0, total)` by masked rejection.
    fn draw(&self, rng: &mut ChaCha20Rng) -> u128 {
        let bits = 128 - (self.total - 1).leading_zeros();
        let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
        loop {
            let mut v = rng.next_u64() as u128;
            if bits > 64 {
                v |= (rng.next_u64() as u128) << 64;
            }
            v &= mask;
            if v < self.total {
                return v;
            }
        }
    }

    /// The `index`-th sample of the stream.
    pub fn sample<F: BinaryFloat>(&self, index: u64) -> F {
        let mut rng = self.rng.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        let r = self.draw(&mut rng);
        let seg_idx = self.segments.partition_point(|s| s.offset <= r) - 1;
        let seg = &self.segments[seg_idx];
        let within = ((r - seg.offset) >> seg.shift) as u64;
        F::from_bits_u64(seg.start_bits + within)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_binade_population() {
        let s = Sampler::new(1.0f64, 2.0, 7).unwrap();
        assert_eq!(s.population(), 1u128 << 52);
        let s = Sampler::new(0.5f32, 1.0, 7).unwrap();
        assert_eq!(s.population(), 1u128 << 23);
    }

    #[test]
    fn samples_stay_in_range_and_repeat() {
        let s = Sampler::new(1.0f64, 2.0, 42).unwrap();
        let t = Sampler::new(1.0f64, 2.0, 42).unwrap();
        for i in 0..1000 {
            let x: f64 = s.sample(i);
            assert!((1.0..2.0).contains(&x));
            assert_eq!(x.to_bits(), t.sample::<f64>(i).to_bits());
        }
        let other = Sampler::new(1.0f64, 2.0, 43).unwrap();
        assert_ne!(s.sample::<f64>(0), other.sample::<f64>(0));
    }

    #[test]
    fn multi_binade_weights_follow_length() {
        // [1, 4): the upper binade is twice as long, so it gets ~2/3.
        let s = Sampler::new(1.0f64, 4.0, 1).unwrap();
        let n = 30_000;
        let upper = (0..n).filter(|&i| s.sample::<f64>(i) >= 2.0).count();
        let frac = upper as f64 / n as f64;
        assert!((frac - 2.0 / 3.0).abs() < 0.02, "{frac}");
    }

    #[test]
    fn partial_binades() {
        let s = Sampler::new(1.5f64, 2.5, 3).unwrap();
        for i in 0..2000 {
            let x: f64 = s.sample(i);
            assert!((1.5..2.5).contains(&x));
        }
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(Sampler::new(2.0f64, 1.0, 0).is_err());
        assert!(Sampler::new(0.0f64, 1.0, 0).is_err());
        assert!(Sampler::new(1.0f64, f64::INFINITY, 0).is_err());
        assert!(Sampler::new(1e-300f64, 1e300, 0).is_err());
    }
}
