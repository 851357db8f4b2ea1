//! Wall-clock timing of the kernels. Hardware dependent; informational only.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algos::{AlgorithmId, DomainError, Kernels};
use crate::fp::Precision;

use super::{HarnessError, Sampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: AlgorithmId,
    pub median_ns: f64,
    pub min_ns: f64,
    pub max_ns: f64,
    /// Sum of all outputs of the last repetition; keeps the work observable.
    pub checksum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub n: u64,
    pub reps: u32,
    pub rows: Vec<BenchRow>,
    /// Median time of the Halley-finished square-root-free kernel over the
    /// plain one, when both were timed.
    pub ratio_331d_halley_over_331d: Option<f64>,
}

impl BenchReport {
    pub fn row(&self, id: AlgorithmId) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algo == id)
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn time_kernel<F: Kernels>(kernel: fn(F) -> F, inputs: &[F], reps: u32) -> (Vec<f64>, f64) {
    let mut per_op = Vec::with_capacity(reps as usize);
    let mut checksum = 0.0;
    for _ in 0..reps {
        let start = Instant::now();
        let mut acc = 0.0f64;
        for &x in inputs {
            acc += kernel(black_box(x)).to_f64();
        }
        let elapsed = start.elapsed();
        checksum = black_box(acc);
        per_op.push(elapsed.as_nanos() as f64 / inputs.len() as f64);
    }
    per_op.sort_by(f64::total_cmp);
    (per_op, checksum)
}

fn bench_typed<F: Kernels>(
    algorithms: &[AlgorithmId],
    n: u64,
    reps: u32,
    seed: u64,
) -> Result<Vec<BenchRow>, HarnessError> {
    let sampler = Sampler::new(F::HALF, F::ONE + F::ONE, seed)?;
    let inputs: Vec<F> = (0..n).map(|i| sampler.sample(i)).collect();
    algorithms
        .iter()
        .map(|&algo| {
            let kernel = F::kernel(algo).ok_or(DomainError::Unsupported {
                algorithm: algo,
                precision: F::PRECISION,
            })?;
            let (times, checksum) = time_kernel(kernel, &inputs, reps);
            Ok(BenchRow {
                algo,
                median_ns: median(&times),
                min_ns: times[0],
                max_ns: times[times.len() - 1],
                checksum,
            })
        })
        .collect()
}

/// Times each algorithm over `n` inputs drawn from `[1/2, 2)`, `reps` times.
pub fn run_benchmark(
    algorithms: &[AlgorithmId],
    n: u64,
    reps: u32,
    precision: Precision,
    seed: u64,
) -> Result<BenchReport, HarnessError> {
    if n == 0 || reps == 0 {
        return Err(HarnessError::InvalidPlan("n and reps must be at least 1".into()));
    }
    let rows = match precision {
        Precision::Binary32 => bench_typed::<f32>(algorithms, n, reps, seed)?,
        Precision::Binary64 => bench_typed::<f64>(algorithms, n, reps, seed)?,
    };
    let median_of = |id| rows.iter().find(|r: &&BenchRow| r.algo == id).map(|r| r.median_ns);
    let ratio = match (
        median_of(AlgorithmId::RcpSqrt331dHalley),
        median_of(AlgorithmId::RcpSqrt331d),
    ) {
        (Some(h), Some(b)) if b > 0.0 => Some(h / b),
        _ => None,
    };
    Ok(BenchReport { n, reps, rows, ratio_331d_halley_over_331d: ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke() {
        let r = run_benchmark(&[AlgorithmId::Naive], 1, 1, Precision::Binary64, 0).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(r.ratio_331d_halley_over_331d.is_none());
        assert!(r.rows[0].checksum > 0.0);
    }

    #[test]
    fn ratio_reported() {
        let r = run_benchmark(
            &[AlgorithmId::RcpSqrt331d, AlgorithmId::RcpSqrt331dHalley],
            1000,
            3,
            Precision::Binary64,
            1,
        )
        .unwrap();
        let ratio = r.ratio_331d_halley_over_331d.unwrap();
        assert!(ratio.is_finite() && ratio > 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(run_benchmark(&[AlgorithmId::Naive], 0, 1, Precision::Binary64, 0).is_err());
        assert!(run_benchmark(&[AlgorithmId::RcpSqrt331d], 10, 1, Precision::Binary32, 0).is_err());
    }
}
