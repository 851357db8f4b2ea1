//! Precision-parametric IEEE 754 binary float utilities.
//!
//! Everything here works on the raw bit patterns of `f32` and `f64` through the
//! [`BinaryFloat`] trait, so the same code serves binary32 and binary64.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A supported IEEE 754 binary interchange format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Binary32,
    Binary64,
}

impl Precision {
    /// Significand width including the hidden bit.
    pub const fn p(self) -> u32 {
        match self {
            Precision::Binary32 => 24,
            Precision::Binary64 => 53,
        }
    }

    pub const fn emin(self) -> i32 {
        1 - self.emax()
    }

    pub const fn emax(self) -> i32 {
        match self {
            Precision::Binary32 => 127,
            Precision::Binary64 => 1023,
        }
    }

    pub const fn storage_bits(self) -> u32 {
        match self {
            Precision::Binary32 => 32,
            Precision::Binary64 => 64,
        }
    }

    pub const fn exponent_bits(self) -> u32 {
        self.storage_bits() - self.p()
    }

    /// log2 of the unit roundoff, `-p`.
    pub const fn unit_roundoff_exp(self) -> i32 {
        -(self.p() as i32)
    }

    pub const fn name(self) -> &'static str {
        match self {
            Precision::Binary32 => "binary32",
            Precision::Binary64 => "binary64",
        }
    }

    /// Short tag used on the command line.
    pub const fn tag(self) -> &'static str {
        match self {
            Precision::Binary32 => "b32",
            Precision::Binary64 => "b64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The operations this crate needs from a binary floating-point type.
///
/// Bit patterns are widened to `u64` so generic code can manipulate them
/// without caring about the storage width.
pub trait BinaryFloat:
    Copy
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const PRECISION: Precision;
    const ZERO: Self;
    const ONE: Self;
    const HALF: Self;
    const ONE_AND_HALF: Self;
    const NEG_HALF: Self;
    const INFINITY: Self;

    fn to_bits_u64(self) -> u64;
    fn from_bits_u64(bits: u64) -> Self;
    /// `self * a + b` with a single rounding.
    fn fused_mul_add(self, a: Self, b: Self) -> Self;
    fn square_root(self) -> Self;
    /// Exact widening conversion.
    fn to_f64(self) -> f64;
    /// Exact narrowing; `None` when `v` is not representable.
    fn from_f64_exact(v: f64) -> Option<Self>;

    fn is_nan(self) -> bool;
    fn is_finite(self) -> bool;
}

macro_rules! impl_binary_float {
    ($t:ty, $prec:expr, $bits:ty) => {
        impl BinaryFloat for $t {
            const PRECISION: Precision = $prec;
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const HALF: Self = 0.5;
            const ONE_AND_HALF: Self = 1.5;
            const NEG_HALF: Self = -0.5;
            const INFINITY: Self = <$t>::INFINITY;

            #[inline]
            fn to_bits_u64(self) -> u64 {
                self.to_bits() as u64
            }
            #[inline]
            fn from_bits_u64(bits: u64) -> Self {
                <$t>::from_bits(bits as $bits)
            }
            #[inline]
            fn fused_mul_add(self, a: Self, b: Self) -> Self {
                self.mul_add(a, b)
            }
            #[inline]
            fn square_root(self) -> Self {
                self.sqrt()
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn from_f64_exact(v: f64) -> Option<Self> {
                let n = v as $t;
                if (n as f64) == v || (v.is_nan() && n.is_nan()) {
                    Some(n)
                } else {
                    None
                }
            }
            #[inline]
            fn is_nan(self) -> bool {
                <$t>::is_nan(self)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

impl_binary_float!(f32, Precision::Binary32, u32);
impl_binary_float!(f64, Precision::Binary64, u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("NaN is not accepted")]
    NaN,
    #[error("infinity is not accepted")]
    Infinite,
    #[error("zero is not accepted")]
    Zero,
    #[error("operands have opposite signs")]
    MixedSign,
}

/// Exact decomposition `value = sign * significand * 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FloatParts {
    /// `+1` or `-1`.
    pub sign: i8,
    pub significand: u64,
    pub exponent: i32,
}

#[inline]
fn sign_mask(prec: Precision) -> u64 {
    1u64 << (prec.storage_bits() - 1)
}

#[inline]
fn fraction_mask(prec: Precision) -> u64 {
    (1u64 << (prec.p() - 1)) - 1
}

#[inline]
fn exponent_field(prec: Precision, bits: u64) -> u64 {
    (bits >> (prec.p() - 1)) & ((1u64 << prec.exponent_bits()) - 1)
}

/// Exponent of the least significant significand bit of a subnormal.
#[inline]
pub(crate) fn min_lsb_exponent(prec: Precision) -> i32 {
    prec.emin() - (prec.p() as i32 - 1)
}

fn classify_special<F: BinaryFloat>(x: F) -> Result<(), FpError> {
    if x.is_nan() {
        Err(FpError::NaN)
    } else if !x.is_finite() {
        Err(FpError::Infinite)
    } else {
        Ok(())
    }
}

/// Splits a finite nonzero float into sign, integer significand and exponent.
///
/// Normal values get a significand in `[2^(p-1), 2^p)`; subnormals keep their
/// raw fraction with the minimum exponent.
pub fn decompose<F: BinaryFloat>(x: F) -> Result<FloatParts, FpError> {
    classify_special(x)?;
    let prec = F::PRECISION;
    let bits = x.to_bits_u64();
    let sign = if bits & sign_mask(prec) != 0 { -1 } else { 1 };
    let field = exponent_field(prec, bits);
    let frac = bits & fraction_mask(prec);
    if field == 0 {
        if frac == 0 {
            return Err(FpError::Zero);
        }
        return Ok(FloatParts {
            sign,
            significand: frac,
            exponent: min_lsb_exponent(prec),
        });
    }
    Ok(FloatParts {
        sign,
        significand: frac | (1u64 << (prec.p() - 1)),
        exponent: field as i32 - prec.emax() - (prec.p() as i32 - 1),
    })
}

impl FloatParts {
    /// Rebuilds the float. Panics if the parts do not describe a value of `F`
    /// exactly; use [`compose`] for a fallible version.
    pub fn recompose<F: BinaryFloat>(&self) -> F {
        compose(self.sign < 0, self.significand as u128, self.exponent)
            .expect("parts are not exactly representable")
    }
}

/// Builds `±significand * 2^exponent` if it is exactly representable in `F`.
///
/// The significand need not be normalized. Returns `None` on overflow or when
/// low-order bits would be lost.
pub fn compose<F: BinaryFloat>(negative: bool, significand: u128, exponent: i32) -> Option<F> {
    let prec = F::PRECISION;
    let sign_bit = if negative { sign_mask(prec) } else { 0 };
    if significand == 0 {
        return Some(F::from_bits_u64(sign_bit));
    }
    let p = prec.p() as i32;
    let mut m = significand;
    let mut e = exponent as i64;
    // Bring the leading bit to position p-1.
    let lead = 127 - m.leading_zeros() as i32;
    let shift = lead - (p - 1);
    if shift > 0 {
        if m.trailing_zeros() < shift as u32 {
            return None;
        }
        m >>= shift;
        e += shift as i64;
    } else if shift < 0 {
        m <<= -shift;
        e += shift as i64;
    }
    let min_e = min_lsb_exponent(prec) as i64;
    if e < min_e {
        // Subnormal: shift right until the exponent reaches the floor.
        let down = min_e - e;
        if down >= 128 || m.trailing_zeros() < down as u32 {
            return None;
        }
        m >>= down;
        return Some(F::from_bits_u64(sign_bit | m as u64));
    }
    let field = e + (p as i64 - 1) + prec.emax() as i64;
    if field >= (1i64 << prec.exponent_bits()) - 1 {
        return None;
    }
    let frac = (m as u64) & fraction_mask(prec);
    Some(F::from_bits_u64(
        sign_bit | ((field as u64) << (p - 1)) | frac,
    ))
}

/// `2^k` when representable.
pub fn pow2<F: BinaryFloat>(k: i32) -> Option<F> {
    compose(false, 1, k)
}

/// Unit roundoff `u = 2^-p`, half of `ulp(1)`.
pub fn unit_roundoff<F: BinaryFloat>() -> F {
    pow2(F::PRECISION.unit_roundoff_exp()).expect("unit roundoff is representable")
}

/// Unit in the last place: `2^(e-p+1)` for `|x|` in `[2^e, 2^(e+1))`, the
/// subnormal spacing below the normal range.
pub fn ulp_of<F: BinaryFloat>(x: F) -> Result<F, FpError> {
    let parts = decompose(x)?;
    Ok(pow2(parts.exponent).expect("ulp is representable"))
}

/// Smallest float strictly greater than `x`. Identity on NaN and `+inf`.
pub fn next_up<F: BinaryFloat>(x: F) -> F {
    let prec = F::PRECISION;
    if x.is_nan() || x == F::INFINITY {
        return x;
    }
    let bits = x.to_bits_u64();
    let magnitude = bits & !sign_mask(prec);
    let next = if magnitude == 0 {
        1
    } else if bits & sign_mask(prec) != 0 {
        bits - 1
    } else {
        bits + 1
    };
    F::from_bits_u64(next)
}

/// Largest float strictly less than `x`. Identity on NaN and `-inf`.
pub fn next_down<F: BinaryFloat>(x: F) -> F {
    -next_up(-x)
}

/// Position of `x` in the ordered sequence of floats; `-0` and `+0` share 0.
fn rank<F: BinaryFloat>(x: F) -> i64 {
    let prec = F::PRECISION;
    let bits = x.to_bits_u64();
    let magnitude = (bits & !sign_mask(prec)) as i64;
    if bits & sign_mask(prec) != 0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Number of floats stepped over going from `a` to `b`.
///
/// Both operands must be finite and on the same side of zero (a zero pairs
/// with anything).
pub fn ulp_distance<F: BinaryFloat>(a: F, b: F) -> Result<u64, FpError> {
    classify_special(a)?;
    classify_special(b)?;
    let (ra, rb) = (rank(a), rank(b));
    if (ra < 0 && rb > 0) || (ra > 0 && rb < 0) {
        return Err(FpError::MixedSign);
    }
    Ok(ra.abs_diff(rb))
}

/// Whether `x` is a nonzero subnormal.
pub fn is_subnormal<F: BinaryFloat>(x: F) -> bool {
    let bits = x.to_bits_u64();
    exponent_field(F::PRECISION, bits) == 0 && bits & fraction_mask(F::PRECISION) != 0
}
