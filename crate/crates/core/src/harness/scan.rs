//! Evaluation along the family `(1 - 2u) * 4^k`, where the plain compensated
//! Newton step lands one ulp low.

use serde::{Deserialize, Serialize};

use crate::algos::{self, AlgorithmId, Kernels};
use crate::fp::{self, BinaryFloat, Precision};
use crate::oracle::{self, CandidateClass};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: i32,
    pub x: f64,
    pub algorithm: AlgorithmId,
    pub output: f64,
    pub correct: f64,
    pub class: CandidateClass,
    pub ulp: u64,
}

/// `(1 - 2u) * 4^k`, if representable.
pub fn counterexample_input<F: BinaryFloat>(k: i32) -> Option<F> {
    let p = F::PRECISION.p();
    // (2^p - 2) * 2^-p = 1 - 2u
    fp::compose(false, (1u128 << p) - 2, 2 * k - p as i32)
}

fn scan_typed<F: Kernels>(
    ks: std::ops::RangeInclusive<i32>,
    algorithms: &[AlgorithmId],
) -> Result<Vec<ScanRow>, HarnessError> {
    let mut rows = Vec::new();
    for k in ks {
        let x: F = counterexample_input(k)
            .ok_or_else(|| HarnessError::InvalidPlan(format!("(1-2u)*4^{k} is not representable")))?;
        let correct = oracle::oracle_rsqrt(x)?;
        for &id in algorithms {
            let output = algos::rsqrt(x, id)?;
            let verdict = oracle::classify_against(output, x, correct);
            rows.push(ScanRow {
                k,
                x: x.to_f64(),
                algorithm: id,
                output: output.to_f64(),
                correct: correct.to_f64(),
                class: verdict.class,
                ulp: verdict.ulp_distance,
            });
        }
    }
    Ok(rows)
}

/// Evaluates every algorithm directly at `(1 - 2u) * 4^k` for each `k` and
/// classifies the result. Every input must lie in the safe window.
pub fn scan_counterexample_family(
    k_min: i32,
    k_max: i32,
    algorithms: &[AlgorithmId],
    precision: Precision,
) -> Result<Vec<ScanRow>, HarnessError> {
    if k_min > k_max {
        return Err(HarnessError::InvalidPlan(format!("empty k range {k_min}..={k_max}")));
    }
    match precision {
        Precision::Binary32 => scan_typed::<f32>(k_min..=k_max, algorithms),
        Precision::Binary64 => scan_typed::<f64>(k_min..=k_max, algorithms),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_inputs() {
        assert_eq!(counterexample_input::<f64>(0), Some(1.0 - 2f64.powi(-52)));
        assert_eq!(counterexample_input::<f64>(3), Some((1.0 - 2f64.powi(-52)) * 64.0));
        assert_eq!(counterexample_input::<f32>(-1), Some((1.0 - 2f32.powi(-23)) / 4.0));
        assert_eq!(counterexample_input::<f32>(70), None);
    }

    #[test]
    fn newton_low_halley_correct() {
        let rows = scan_counterexample_family(
            0,
            5,
            &[AlgorithmId::Newton, AlgorithmId::Halley],
            Precision::Binary64,
        )
        .unwrap();
        assert_eq!(rows.len(), 12);
        for row in &rows {
            match row.algorithm {
                AlgorithmId::Newton => {
                    assert_eq!(row.class, CandidateClass::FaithfulLow);
                    assert_eq!(row.output, 2f64.powi(-row.k));
                }
                _ => assert_eq!(row.class, CandidateClass::CorrectlyRounded),
            }
        }
        let k5 = rows.iter().find(|r| r.k == 5 && r.algorithm == AlgorithmId::Newton).unwrap();
        assert_eq!(k5.output, 2f64.powi(-5));
        assert_eq!(k5.correct, 2f64.powi(-5) * (1.0 + 2f64.powi(-52)));
    }

    #[test]
    fn out_of_window_is_an_error() {
        assert!(scan_counterexample_family(600, 600, &[AlgorithmId::Newton], Precision::Binary64).is_err());
        assert!(scan_counterexample_family(3, 1, &[AlgorithmId::Newton], Precision::Binary64).is_err());
    }
}
