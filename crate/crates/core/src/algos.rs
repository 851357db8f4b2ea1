//! Reciprocal square root kernels.
//!
//! Each kernel is a fixed straight-line sequence of correctly rounded
//! operations. The order of every multiply, divide and fused multiply-add is
//! part of the contract: reassociating any of them changes the bits produced.
//!
//! The plain `fn(F) -> F` kernels assume their argument lies in the safe window
//! (see [`in_safe_window`]). The checked `rsqrt_*` entry points validate the
//! argument, and [`rsqrt_full_range`] reduces any positive finite input into
//! `[1, 4)` by an exact power of four.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp::{self, BinaryFloat, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmId {
    Naive,
    Newton,
    Halley,
    #[serde(rename = "rcpsqrt331d")]
    RcpSqrt331d,
    #[serde(rename = "rcpsqrt331dhalley")]
    RcpSqrt331dHalley,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::Naive,
        AlgorithmId::Newton,
        AlgorithmId::Halley,
        AlgorithmId::RcpSqrt331d,
        AlgorithmId::RcpSqrt331dHalley,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            AlgorithmId::Naive => "naive",
            AlgorithmId::Newton => "newton",
            AlgorithmId::Halley => "halley",
            AlgorithmId::RcpSqrt331d => "rcpsqrt331d",
            AlgorithmId::RcpSqrt331dHalley => "rcpsqrt331dhalley",
        }
    }

    /// The bit-trick seeds carry binary64 constants only.
    pub const fn supports(self, precision: Precision) -> bool {
        match self {
            AlgorithmId::RcpSqrt331d | AlgorithmId::RcpSqrt331dHalley => {
                matches!(precision, Precision::Binary64)
            }
            _ => true,
        }
    }

    /// Algorithms whose results must never be more than one ulp off.
    pub const fn weakly_rounded(self) -> bool {
        matches!(self, AlgorithmId::Newton | AlgorithmId::Halley)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm `{0}` (expected naive, newton, halley, rcpsqrt331d or rcpsqrt331dhalley)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for AlgorithmId {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .ok_or(UnknownAlgorithm(s.to_string()))
    }
}

/// Why an argument was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("argument is zero")]
    Zero,
    #[error("argument is negative")]
    Negative,
    #[error("argument is NaN")]
    NaN,
    #[error("argument is infinite")]
    Infinite,
    #[error("argument is subnormal")]
    Subnormal,
    #[error("argument is outside the direct-evaluation window; use the full-range entry point")]
    OutsideSafeWindow,
    #[error("{algorithm} is not available in {precision}")]
    Unsupported {
        algorithm: AlgorithmId,
        precision: Precision,
    },
}

/// Rejects everything that is not a positive finite float.
pub fn check_positive_finite<F: BinaryFloat>(x: F) -> Result<(), DomainError> {
    if x.is_nan() {
        Err(DomainError::NaN)
    } else if x == F::ZERO {
        Err(DomainError::Zero)
    } else if x < F::ZERO {
        Err(DomainError::Negative)
    } else if !x.is_finite() {
        Err(DomainError::Infinite)
    } else {
        Ok(())
    }
}

/// Lower end of the direct-evaluation window: four times the smallest normal.
pub fn safe_window_min<F: BinaryFloat>() -> F {
    fp::pow2(F::PRECISION.emin() + 2).expect("representable")
}

/// Upper end (exclusive) of the direct-evaluation window, `2^(-emin-p)`.
///
/// Above it `y*y - r` can fall below the subnormal grid and the fused
/// residual stops being exact.
pub fn safe_window_max<F: BinaryFloat>() -> F {
    let prec = F::PRECISION;
    fp::pow2(-prec.emin() - prec.p() as i32).expect("representable")
}

pub fn in_safe_window<F: BinaryFloat>(x: F) -> bool {
    x >= safe_window_min::<F>() && x < safe_window_max::<F>()
}

fn check_direct<F: BinaryFloat>(x: F) -> Result<(), DomainError> {
    check_positive_finite(x)?;
    if fp::is_subnormal(x) {
        return Err(DomainError::Subnormal);
    }
    if !in_safe_window(x) {
        return Err(DomainError::OutsideSafeWindow);
    }
    Ok(())
}

/// `sqrt(1/x)` with two roundings.
#[inline]
pub fn naive<F: BinaryFloat>(x: F) -> F {
    let r = F::ONE / x;
    r.square_root()
}

/// Naive estimate refined by one Newton step whose correction term is
/// computed with a single rounding.
#[inline]
pub fn newton<F: BinaryFloat>(x: F) -> F {
    let r = F::ONE / x;
    let y = r.square_root();
    let mxhalf = F::NEG_HALF * x;
    let sigma = mxhalf.fused_mul_add(r, F::HALF);
    let tau = y.fused_mul_add(y, -r);
    let nu_bar = mxhalf.fused_mul_add(tau, sigma);
    y.fused_mul_add(nu_bar, y)
}

/// Like [`newton`], with the correction upgraded to second order
/// (`nu = nu_bar + 1.5 nu_bar^2`).
#[inline]
pub fn halley<F: BinaryFloat>(x: F) -> F {
    let r = F::ONE / x;
    let y = r.square_root();
    let mxhalf = F::NEG_HALF * x;
    let sigma = mxhalf.fused_mul_add(r, F::HALF);
    let tau = y.fused_mul_add(y, -r);
    let nu_bar = mxhalf.fused_mul_add(tau, sigma);
    let nu = (F::ONE_AND_HALF * nu_bar).fused_mul_add(nu_bar, nu_bar);
    y.fused_mul_add(nu, y)
}

/// Magic-constant seed plus two polynomial refinements, shared by both
/// square-root-free kernels. Returns `(y, mxhalf)`.
#[inline]
#[allow(clippy::excessive_precision)]
fn rcp_sqrt_331d_core(x: f64) -> (f64, f64) {
    let mut i = x.to_bits() as i64;
    let k = i & 0x0010_0000_0000_0000;
    let mut y;
    if k != 0 {
        i = 0x5fdb_3d14_1700_34b6 - (i >> 1);
        y = f64::from_bits(i as u64);
        y = 2.33124735553421569 * y * (-x).mul_add(y * y, 1.07497362654295614);
    } else {
        i = 0x5fe3_3d18_a2b9_ef5f - (i >> 1);
        y = f64::from_bits(i as u64);
        y = 0.82421942523718461 * y * (-x).mul_add(y * y, 2.1499494964450325);
    }
    let mxhalf = -0.5 * x;
    y = y * mxhalf.mul_add(y * y, 1.5000000034937999);
    (y, mxhalf)
}

/// Square-root-free estimate finished with one plain Newton step.
#[inline]
pub fn rcp_sqrt_331d(x: f64) -> f64 {
    let (y, mxhalf) = rcp_sqrt_331d_core(x);
    let r = mxhalf.mul_add(y * y, 0.5);
    y.mul_add(r, y)
}

/// Square-root-free estimate finished with the fused second-order correction.
#[inline]
pub fn rcp_sqrt_331d_halley(x: f64) -> f64 {
    let (y, mxhalf) = rcp_sqrt_331d_core(x);
    let r = 1.0 / x;
    let sigma = r.mul_add(mxhalf, 0.5);
    let tau = y.mul_add(y, -r);
    let nu_bar = mxhalf.mul_add(tau, sigma);
    let nu = (1.5 * nu_bar).mul_add(nu_bar, nu_bar);
    y.mul_add(nu, y)
}

/// Per-type kernel table.
pub trait Kernels: BinaryFloat {
    /// The raw kernel for `id`, or `None` if it does not exist at this precision.
    fn kernel(id: AlgorithmId) -> Option<fn(Self) -> Self>;
}

impl Kernels for f64 {
    fn kernel(id: AlgorithmId) -> Option<fn(f64) -> f64> {
        Some(match id {
            AlgorithmId::Naive => naive::<f64>,
            AlgorithmId::Newton => newton::<f64>,
            AlgorithmId::Halley => halley::<f64>,
            AlgorithmId::RcpSqrt331d => rcp_sqrt_331d,
            AlgorithmId::RcpSqrt331dHalley => rcp_sqrt_331d_halley,
        })
    }
}

impl Kernels for f32 {
    fn kernel(id: AlgorithmId) -> Option<fn(f32) -> f32> {
        match id {
            AlgorithmId::Naive => Some(naive::<f32>),
            AlgorithmId::Newton => Some(newton::<f32>),
            AlgorithmId::Halley => Some(halley::<f32>),
            AlgorithmId::RcpSqrt331d | AlgorithmId::RcpSqrt331dHalley => None,
        }
    }
}

fn kernel_for<F: Kernels>(id: AlgorithmId) -> Result<fn(F) -> F, DomainError> {
    F::kernel(id).ok_or(DomainError::Unsupported {
        algorithm: id,
        precision: F::PRECISION,
    })
}

/// Evaluates `id` directly on `x`, which must be a normal float inside the
/// safe window.
pub fn rsqrt<F: Kernels>(x: F, id: AlgorithmId) -> Result<F, DomainError> {
    let kernel = kernel_for::<F>(id)?;
    check_direct(x)?;
    Ok(kernel(x))
}

pub fn rsqrt_naive<F: Kernels>(x: F) -> Result<F, DomainError> {
    rsqrt(x, AlgorithmId::Naive)
}

pub fn rsqrt_newton<F: Kernels>(x: F) -> Result<F, DomainError> {
    rsqrt(x, AlgorithmId::Newton)
}

pub fn rsqrt_halley<F: Kernels>(x: F) -> Result<F, DomainError> {
    rsqrt(x, AlgorithmId::Halley)
}

pub fn rsqrt_331d(x: f64) -> Result<f64, DomainError> {
    rsqrt(x, AlgorithmId::RcpSqrt331d)
}

pub fn rsqrt_331d_halley(x: f64) -> Result<f64, DomainError> {
    rsqrt(x, AlgorithmId::RcpSqrt331dHalley)
}

/// Splits a positive finite `x` into `4^k * reduced` with `reduced` in `[1, 4)`.
pub fn reduce_by_four<F: BinaryFloat>(x: F) -> Result<(F, i32), DomainError> {
    check_positive_finite(x)?;
    let parts = fp::decompose(x).expect("positive finite");
    let top = parts.exponent + (63 - parts.significand.leading_zeros() as i32);
    let k = top.div_euclid(2);
    let reduced = fp::compose(false, parts.significand as u128, parts.exponent - 2 * k)
        .expect("reduced argument lies in [1, 4)");
    Ok((reduced, k))
}

/// Multiplies `y` by `2^-k` exactly. Panics if the product is not representable.
pub(crate) fn scale_by_pow2<F: BinaryFloat>(y: F, k: i32) -> F {
    let parts = fp::decompose(y).expect("kernel output is finite and nonzero");
    fp::compose(parts.sign < 0, parts.significand as u128, parts.exponent - k)
        .expect("rsqrt of a finite float is representable")
}

/// Evaluates `id` on any positive finite `x`, subnormals included, using
/// `rsqrt(4^k x') = 2^-k rsqrt(x')` with `x'` in `[1, 4)`.
pub fn rsqrt_full_range<F: Kernels>(x: F, id: AlgorithmId) -> Result<F, DomainError> {
    let kernel = kernel_for::<F>(id)?;
    let (reduced, k) = reduce_by_four(x)?;
    Ok(scale_by_pow2(kernel(reduced), k))
}

/// Checks that `fma` fuses: `(1+2u)^2 - (1+4u)` is exactly `4u^2`, while a
/// multiply followed by an add yields zero.
pub fn fma_sanity_check_for<F: BinaryFloat>() -> bool {
    let u = fp::unit_roundoff::<F>();
    let two = F::ONE + F::ONE;
    let a = black_box(F::ONE + two * u);
    let c = black_box(-(F::ONE + two * two * u));
    let expected = two * two * u * u;
    let got = a.fused_mul_add(a, c);
    got != F::ZERO && got == expected
}

/// FMA check for both supported precisions.
pub fn fma_sanity_check() -> bool {
    fma_sanity_check_for::<f32>() && fma_sanity_check_for::<f64>()
}

/// Intermediate values of the compensated Newton step, exposed for the
/// exactness checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonTrace<F> {
    pub x: F,
    pub r: F,
    pub y: F,
    pub mxhalf: F,
    pub sigma: F,
    pub tau: F,
    pub nu_bar: F,
    pub result: F,
}

/// Runs [`newton`] step by step, recording every intermediate.
pub fn trace_newton<F: BinaryFloat>(x: F) -> NewtonTrace<F> {
    let r = F::ONE / x;
    let y = r.square_root();
    let mxhalf = F::NEG_HALF * x;
    let sigma = mxhalf.fused_mul_add(r, F::HALF);
    let tau = y.fused_mul_add(y, -r);
    let nu_bar = mxhalf.fused_mul_add(tau, sigma);
    let result = y.fused_mul_add(nu_bar, y);
    NewtonTrace { x, r, y, mxhalf, sigma, tau, nu_bar, result }
}
