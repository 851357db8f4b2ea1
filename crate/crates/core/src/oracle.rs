//! Exact correct-rounding reference for `1/sqrt(x)`.
//!
//! No extended-precision floating point is involved. Whether a dyadic value
//! `q > 0` lies above or below `1/sqrt(x)` is decided by the sign of
//! `q^2 x - 1`, which is itself a dyadic rational. The correctly rounded result
//! is the float whose two neighbouring midpoints straddle `1/sqrt(x)`. A
//! midpoint can never equal the reciprocal square root of a binary float, so a
//! zero sign from a midpoint test means a bug and aborts.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use crate::algos::{self, DomainError};
use crate::dyadic::DyadicRational;
use crate::fp::{self, BinaryFloat};

/// How a candidate relates to the true reciprocal square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CandidateClass {
    CorrectlyRounded,
    /// One ulp below the correct result, with the true value between them.
    FaithfulLow,
    /// One ulp above the correct result, with the true value between them.
    FaithfulHigh,
    /// Not one of the two floats bracketing the true value.
    Unfaithful(u64),
}

impl CandidateClass {
    pub fn is_faithful(self) -> bool {
        !matches!(self, CandidateClass::Unfaithful(_))
    }
}

impl fmt::Display for CandidateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateClass::CorrectlyRounded => f.write_str("CorrectlyRounded"),
            CandidateClass::FaithfulLow => f.write_str("FaithfulLow"),
            CandidateClass::FaithfulHigh => f.write_str("FaithfulHigh"),
            CandidateClass::Unfaithful(d) => write!(f, "Unfaithful({d})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingVerdict<F> {
    /// Round-to-nearest `1/sqrt(x)`.
    pub correct: F,
    pub class: CandidateClass,
    pub ulp_distance: u64,
}

/// Sign of `q - 1/sqrt(x)`, computed exactly as the sign of `q^2 x - 1`.
///
/// Panics unless `q > 0` and `x` is positive and finite.
pub fn compare_to_rsqrt<F: BinaryFloat>(q: &DyadicRational, x: F) -> Ordering {
    assert!(q.signum() == Ordering::Greater, "q must be positive");
    assert!(x > F::ZERO && x.is_finite(), "x must be positive and finite");
    let x = DyadicRational::from_float(x);
    let q2x = &(q * q) * &x;
    q2x.cmp_abs_one()
}

/// Like [`compare_to_rsqrt`] for a float `q`.
pub fn compare_float_to_rsqrt<F: BinaryFloat>(q: F, x: F) -> Ordering {
    compare_to_rsqrt(&DyadicRational::from_float(q), x)
}

/// Exact midpoints `(pred(y) + y)/2` and `(y + succ(y))/2` of a positive float.
pub fn midpoints<F: BinaryFloat>(y: F) -> (DyadicRational, DyadicRational) {
    let here = DyadicRational::from_float(y);
    let below = DyadicRational::from_float(fp::next_down(y));
    let above = DyadicRational::from_float(fp::next_up(y));
    (
        DyadicRational::midpoint(&below, &here),
        DyadicRational::midpoint(&here, &above),
    )
}

static MIDPOINT_TESTS: AtomicU64 = AtomicU64::new(0);

/// Number of midpoint sign tests performed by the oracle in this process.
/// Every one of them was strict: a tie panics.
pub fn midpoint_tests() -> u64 {
    MIDPOINT_TESTS.load(AtomicOrdering::Relaxed)
}

/// Correctly rounded `1/sqrt(x)` for a reduced argument in `[1, 4)`.
fn oracle_reduced<F: BinaryFloat>(x: F) -> F {
    // Walks from the compensated estimate, which is within one ulp.
    let mut y = algos::newton(x);
    for _ in 0..8 {
        let (low, high) = midpoints(y);
        MIDPOINT_TESTS.fetch_add(1, AtomicOrdering::Relaxed);
        match compare_to_rsqrt(&high, x) {
            Ordering::Less => {
                y = fp::next_up(y);
                continue;
            }
            Ordering::Equal => panic!("rsqrt({x:?}) equals the midpoint above {y:?}"),
            Ordering::Greater => {}
        }
        MIDPOINT_TESTS.fetch_add(1, AtomicOrdering::Relaxed);
        match compare_to_rsqrt(&low, x) {
            Ordering::Greater => y = fp::next_down(y),
            Ordering::Equal => panic!("rsqrt({x:?}) equals the midpoint below {y:?}"),
            Ordering::Less => return y,
        }
    }
    panic!("oracle walk for rsqrt({x:?}) did not converge")
}

/// Round-to-nearest `1/sqrt(x)` for any positive finite `x`.
pub fn oracle_rsqrt<F: BinaryFloat>(x: F) -> Result<F, DomainError> {
    let (reduced, k) = algos::reduce_by_four(x)?;
    Ok(algos::scale_by_pow2(oracle_reduced(reduced), k))
}

/// Classifies `candidate` against a precomputed correctly rounded value.
pub fn classify_against<F: BinaryFloat>(candidate: F, x: F, correct: F) -> RoundingVerdict<F> {
    let distance = fp::ulp_distance(candidate, correct).unwrap_or(u64::MAX);
    let class = match distance {
        0 => CandidateClass::CorrectlyRounded,
        1 => {
            // Faithful iff the true value lies strictly between the two.
            let cand_side = compare_float_to_rsqrt(candidate, x);
            let correct_side = compare_float_to_rsqrt(correct, x);
            match (cand_side, correct_side) {
                (Ordering::Less, Ordering::Greater) => CandidateClass::FaithfulLow,
                (Ordering::Greater, Ordering::Less) => CandidateClass::FaithfulHigh,
                _ => CandidateClass::Unfaithful(1),
            }
        }
        d => CandidateClass::Unfaithful(d),
    };
    RoundingVerdict { correct, class, ulp_distance: distance }
}

/// Computes the correctly rounded value and classifies `candidate` against it.
pub fn classify<F: BinaryFloat>(candidate: F, x: F) -> Result<RoundingVerdict<F>, DomainError> {
    algos::check_positive_finite(candidate)?;
    let correct = oracle_rsqrt(x)?;
    Ok(classify_against(candidate, x, correct))
}

/// The exact relative error `nu` of `y`, defined by `1/sqrt(x) = y (1 + nu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeError {
    /// Sign of `nu`; `Less` means `y` overestimates.
    pub sign: Ordering,
    /// `lo <= |nu| <= hi`.
    pub lo: DyadicRational,
    pub hi: DyadicRational,
}

/// Whether `|nu| > t` for `t >= 0`, given the sign of `nu`.
fn magnitude_exceeds<F: BinaryFloat>(y: &DyadicRational, x: F, sign: Ordering, t: &DyadicRational) -> Ordering {
    let one = DyadicRational::one();
    match sign {
        Ordering::Equal => t.signum().reverse(),
        // nu > t  <=>  (1 + t) y < 1/sqrt(x)
        Ordering::Greater => compare_to_rsqrt(&(&(&one + t) * y), x).reverse(),
        // -nu > t  <=>  (1 - t) y > 1/sqrt(x)
        Ordering::Less => {
            let factor = &one - t;
            if factor.signum() != Ordering::Greater {
                // nu > -1 always.
                return Ordering::Less;
            }
            compare_to_rsqrt(&(&factor * y), x)
        }
    }
}

/// Sign of `nu` and an enclosure of `|nu|` narrower than `2^-2p`, found by
/// bisection on dyadic rationals.
pub fn exact_relative_error<F: BinaryFloat>(candidate: F, x: F) -> Result<RelativeError, DomainError> {
    algos::check_positive_finite(candidate)?;
    algos::check_positive_finite(x)?;
    let y = DyadicRational::from_float(candidate);
    let sign = compare_to_rsqrt(&y, x).reverse();
    if sign == Ordering::Equal {
        return Ok(RelativeError { sign, lo: DyadicRational::zero(), hi: DyadicRational::zero() });
    }
    let mut lo = DyadicRational::zero();
    let mut hi = DyadicRational::one();
    while magnitude_exceeds(&y, x, sign, &hi) == Ordering::Greater {
        lo = hi.clone();
        hi = hi.scale2(1);
    }
    let width = DyadicRational::pow2(-2 * F::PRECISION.p() as i64);
    while &hi - &lo >= width {
        let mid = DyadicRational::midpoint(&lo, &hi);
        match magnitude_exceeds(&y, x, sign, &mid) {
            Ordering::Greater => lo = mid,
            Ordering::Less => hi = mid,
            Ordering::Equal => {
                lo = mid.clone();
                hi = mid;
                break;
            }
        }
    }
    Ok(RelativeError { sign, lo, hi })
}

/// Whether `|nu| < bound` holds exactly for the relative error of `candidate`.
pub fn relative_error_below<F: BinaryFloat>(candidate: F, x: F, bound: &DyadicRational) -> bool {
    let y = DyadicRational::from_float(candidate);
    let sign = compare_to_rsqrt(&y, x).reverse();
    magnitude_exceeds(&y, x, sign, bound) == Ordering::Less
}
