//! Reciprocal square root kernels with fused multiply-add compensation, an
//! exact big-integer correct-rounding oracle, and an accuracy harness.
//!
//! * [`fp`]: bit-level float utilities (ulp, neighbours, ulp distance).
//! * [`algos`]: the kernels themselves.
//! * [`dyadic`] and [`oracle`]: exact reference values and verdicts.
//! * [`harness`]: sampled and exhaustive accuracy runs, invariant checks,
//!   benchmarks.
//! * [`cli`]: the `rsqrt-forge` command line.
//! * [`report`]: report envelope and its markdown, CSV and JSON renderings.

pub mod algos;
pub mod cli;
pub mod dyadic;
pub mod fp;
pub mod harness;
pub mod hexfloat;
pub mod oracle;
pub mod report;

pub use algos::{AlgorithmId, DomainError};
pub use dyadic::DyadicRational;
pub use fp::{BinaryFloat, Precision};
pub use oracle::{CandidateClass, RoundingVerdict};
