//! Accuracy experiments against the exact oracle.
//!
//! All runs split their index range into fixed chunks, tally each chunk
//! independently and merge the tallies in chunk order. Results are therefore
//! identical for any thread count.

mod bench;
mod histogram;
mod invariants;
mod sampling;
mod scan;

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::algos::{self, AlgorithmId, DomainError, Kernels};
use crate::fp::{self, BinaryFloat, Precision};
use crate::oracle;

pub use bench::{run_benchmark, BenchReport, BenchRow};
pub use histogram::{UlpHistogram, WorstCase};
pub use invariants::{
    run_invariant_suite_with, FamilyResult, InvariantFamily, InvariantReport, Witness,
};
pub use sampling::{Sampler, PRNG_ID};
pub use scan::{counterexample_input, scan_counterexample_family, ScanRow};

/// Indices handled per task; part of no contract, results do not depend on it.
const CHUNK: u64 = 1 << 12;

/// Largest interval the exhaustive binary32 sweep accepts.
pub const EXHAUSTIVE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("fused multiply-add is not fused on this platform; refusing to run")]
    FmaUnavailable,
    #[error("interval holds {0} binary32 values; the exhaustive sweep takes at most {EXHAUSTIVE_LIMIT}")]
    IntervalTooLarge(u64),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("could not start worker threads: {0}")]
    Threads(String),
}

/// Interval, size, seed, precision and algorithms of a sampled run.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    /// Interval ends, exactly representable in `precision`.
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub seed: u64,
    pub precision: Precision,
    pub algorithms: Vec<AlgorithmId>,
}

impl SamplePlan {
    pub fn new(lo: f64, hi: f64, count: u64, seed: u64, precision: Precision, algorithms: Vec<AlgorithmId>) -> Self {
        SamplePlan { lo, hi, count, seed, precision, algorithms }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidPlan(m));
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return bad(format!("interval [{}, {}) must satisfy 0 < lo < hi < inf", self.lo, self.hi));
        }
        if self.precision == Precision::Binary32
            && (f32::from_f64_exact(self.lo).is_none() || f32::from_f64_exact(self.hi).is_none())
        {
            return bad("interval ends are not binary32 values".into());
        }
        if self.count == 0 {
            return bad("sample count must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        for &a in &self.algorithms {
            if !a.supports(self.precision) {
                return Err(DomainError::Unsupported { algorithm: a, precision: self.precision }.into());
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> Result<Sampler, HarnessError> {
        match self.precision {
            Precision::Binary32 => Sampler::new(self.lo as f32, self.hi as f32, self.seed),
            Precision::Binary64 => Sampler::new(self.lo, self.hi, self.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledReport {
    pub plan: SamplePlan,
    pub histograms: Vec<UlpHistogram>,
}

impl SampledReport {
    pub fn histogram(&self, id: AlgorithmId) -> Option<&UlpHistogram> {
        self.histograms.iter().find(|h| h.algorithm == id)
    }

    /// Newton and Halley must never be unfaithful.
    pub fn weak_rounding_holds(&self) -> bool {
        weak_rounding_holds(&self.histograms)
    }
}

pub fn weak_rounding_holds(histograms: &[UlpHistogram]) -> bool {
    histograms
        .iter()
        .filter(|h| h.algorithm.weakly_rounded())
        .all(|h| h.two_plus_ulp == 0 && h.unfaithful == 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveReport {
    pub lo: f32,
    pub hi: f32,
    pub histograms: Vec<UlpHistogram>,
    /// Every input where Newton or Halley missed the correctly rounded value.
    pub nonzero_inputs: Vec<(AlgorithmId, Vec<f32>)>,
}

impl ExhaustiveReport {
    pub fn histogram(&self, id: AlgorithmId) -> Option<&UlpHistogram> {
        self.histograms.iter().find(|h| h.algorithm == id)
    }

    pub fn weak_rounding_holds(&self) -> bool {
        weak_rounding_holds(&self.histograms)
    }
}

/// How a kernel is applied to an input.
#[derive(Clone, Copy)]
enum Evaluation {
    Direct,
    FullRange,
}

fn evaluate<F: Kernels>(kernel: fn(F) -> F, x: F, mode: Evaluation) -> F {
    match mode {
        Evaluation::Direct => kernel(x),
        Evaluation::FullRange => {
            let (reduced, k) = algos::reduce_by_four(x).expect("positive finite sample");
            algos::scale_by_pow2(kernel(reduced), k)
        }
    }
}

struct ChunkTally<F> {
    histograms: Vec<UlpHistogram>,
    misses: Vec<Vec<F>>,
}

/// Thread pool wrapper; the thread count never affects results.
pub struct Engine {
    pool: rayon::ThreadPool,
}

impl Engine {
    /// `threads == 0` picks the number of available cores.
    pub fn new(threads: usize) -> Result<Self, HarnessError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::Threads(e.to_string()))?;
        Ok(Engine { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Scores `algorithms` on inputs `input(i)` for `i` in `indices`.
    fn tally<F, G>(
        &self,
        indices: Range<u64>,
        input: G,
        algorithms: &[AlgorithmId],
        mode: Evaluation,
        keep_misses: bool,
    ) -> Result<ChunkTally<F>, HarnessError>
    where
        F: Kernels,
        G: Fn(u64) -> F + Sync,
    {
        let kernels = algorithms
            .iter()
            .map(|&a| {
                F::kernel(a).ok_or(HarnessError::Domain(DomainError::Unsupported {
                    algorithm: a,
                    precision: F::PRECISION,
                }))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let chunk_starts: Vec<u64> = (indices.start..indices.end).step_by(CHUNK as usize).collect();
        let end = indices.end;

        let partials: Vec<ChunkTally<F>> = self.pool.install(|| {
            chunk_starts
                .par_iter()
                .map(|&start| {
                    let mut histograms: Vec<UlpHistogram> =
                        algorithms.iter().map(|&a| UlpHistogram::new(a)).collect();
                    let mut misses = vec![Vec::new(); algorithms.len()];
                    for i in start..(start + CHUNK).min(end) {
                        let x = input(i);
                        let correct = oracle::oracle_rsqrt(x).expect("sample is positive finite");
                        for (slot, &kernel) in kernels.iter().enumerate() {
                            let candidate = evaluate(kernel, x, mode);
                            let distance = fp::ulp_distance(candidate, correct).unwrap_or(u64::MAX);
                            let faithful = match distance {
                                0 => true,
                                1 => oracle::classify_against(candidate, x, correct).class.is_faithful(),
                                _ => false,
                            };
                            histograms[slot].record(x.to_f64(), distance, faithful);
                            if keep_misses && distance != 0 && algorithms[slot].weakly_rounded() {
                                misses[slot].push(x);
                            }
                        }
                    }
                    ChunkTally { histograms, misses }
                })
                .collect()
        });

        let mut total = ChunkTally {
            histograms: algorithms.iter().map(|&a| UlpHistogram::new(a)).collect(),
            misses: vec![Vec::new(); algorithms.len()],
        };
        for part in partials {
            for (acc, h) in total.histograms.iter_mut().zip(&part.histograms) {
                acc.merge(h);
            }
            for (acc, m) in total.misses.iter_mut().zip(part.misses) {
                acc.extend(m);
            }
        }
        Ok(total)
    }

    /// Seeded random inputs from `plan`, each algorithm scored against the
    /// oracle.
    pub fn run_sampled(&self, plan: &SamplePlan) -> Result<SampledReport, HarnessError> {
        plan.validate()?;
        if !algos::fma_sanity_check() {
            return Err(HarnessError::FmaUnavailable);
        }
        let sampler = plan.sampler()?;
        let histograms = match plan.precision {
            Precision::Binary32 => {
                let mode = window_mode(plan.lo as f32, plan.hi as f32);
                self.tally::<f32, _>(0..plan.count, |i| sampler.sample(i), &plan.algorithms, mode, false)?
                    .histograms
            }
            Precision::Binary64 => {
                let mode = window_mode(plan.lo, plan.hi);
                self.tally::<f64, _>(0..plan.count, |i| sampler.sample(i), &plan.algorithms, mode, false)?
                    .histograms
            }
        };
        Ok(SampledReport { plan: plan.clone(), histograms })
    }

    /// Every binary32 value in `[lo, hi)`, at most [`EXHAUSTIVE_LIMIT`] of them.
    pub fn run_exhaustive_b32(
        &self,
        lo: f32,
        hi: f32,
        algorithms: &[AlgorithmId],
    ) -> Result<ExhaustiveReport, HarnessError> {
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(HarnessError::InvalidPlan(format!(
                "interval [{lo}, {hi}) must satisfy 0 < lo < hi < inf"
            )));
        }
        if algorithms.is_empty() {
            return Err(HarnessError::InvalidPlan("no algorithms selected".into()));
        }
        if !algos::fma_sanity_check() {
            return Err(HarnessError::FmaUnavailable);
        }
        let (start, end) = (lo.to_bits() as u64, hi.to_bits() as u64);
        if end - start > EXHAUSTIVE_LIMIT {
            return Err(HarnessError::IntervalTooLarge(end - start));
        }
        let mode = window_mode(lo, hi);
        let tally = self.tally::<f32, _>(
            start..end,
            |bits| f32::from_bits(bits as u32),
            algorithms,
            mode,
            true,
        )?;
        let nonzero_inputs = algorithms
            .iter()
            .zip(tally.misses)
            .filter(|(a, _)| a.weakly_rounded())
            .map(|(&a, m)| (a, m))
            .collect();
        Ok(ExhaustiveReport { lo, hi, histograms: tally.histograms, nonzero_inputs })
    }
}

/// Direct evaluation when the whole interval lies in the safe window.
fn window_mode<F: BinaryFloat>(lo: F, hi: F) -> Evaluation {
    if algos::in_safe_window(lo) && (hi <= algos::safe_window_max::<F>()) {
        Evaluation::Direct
    } else {
        Evaluation::FullRange
    }
}
