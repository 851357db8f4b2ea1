//! Exact dyadic rationals `mantissa * 2^exp2` over arbitrary-precision integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::fp::{self, BinaryFloat};

/// An exact value `mantissa * 2^exp2`, kept canonical: the mantissa is odd, or
/// zero with `exp2 == 0`. Canonical form makes equality structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    mantissa: BigInt,
    exp2: i64,
}

impl DyadicRational {
    pub fn new(mantissa: BigInt, exp2: i64) -> Self {
        let mut d = DyadicRational { mantissa, exp2 };
        d.canonicalize();
        d
    }

    fn canonicalize(&mut self) {
        match self.mantissa.trailing_zeros() {
            None => self.exp2 = 0,
            Some(0) => {}
            Some(tz) => {
                self.mantissa >>= tz;
                self.exp2 += tz as i64;
            }
        }
    }

    pub fn zero() -> Self {
        DyadicRational { mantissa: BigInt::zero(), exp2: 0 }
    }

    pub fn one() -> Self {
        DyadicRational { mantissa: BigInt::one(), exp2: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn pow2(k: i64) -> Self {
        DyadicRational { mantissa: BigInt::one(), exp2: k }
    }

    /// Exact value of a finite float. Panics on NaN or infinity.
    pub fn from_float<F: BinaryFloat>(x: F) -> Self {
        assert!(x.is_finite(), "only finite floats convert exactly");
        if x == F::ZERO {
            return Self::zero();
        }
        let parts = fp::decompose(x).expect("finite nonzero");
        let m = BigInt::from(parts.significand) * i64::from(parts.sign);
        Self::new(m, parts.exponent as i64)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn signum(&self) -> Ordering {
        match self.mantissa.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    pub fn abs(&self) -> Self {
        DyadicRational { mantissa: self.mantissa.abs(), exp2: self.exp2 }
    }

    /// Multiplies by `2^k`.
    pub fn scale2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        DyadicRational { mantissa: self.mantissa.clone(), exp2: self.exp2 + k }
    }

    pub fn half(&self) -> Self {
        self.scale2(-1)
    }

    /// `(a + b) / 2`, exact.
    pub fn midpoint(a: &Self, b: &Self) -> Self {
        (a + b).half()
    }

    /// Compares `|self|` with 1 using only bit lengths (the mantissa is odd).
    pub(crate) fn cmp_abs_one(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Less;
        }
        let bits = self.mantissa.bits() as i64;
        if bits == 1 && self.exp2 == 0 {
            Ordering::Equal
        } else if self.exp2 + bits > 0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    /// Round-to-nearest-even conversion to `F`; overflow gives a signed
    /// infinity, underflow a signed zero.
    pub fn round_to<F: BinaryFloat>(&self) -> F {
        if self.is_zero() {
            return F::ZERO;
        }
        let prec = F::PRECISION;
        let negative = self.mantissa.is_negative();
        let magnitude: BigUint = self.mantissa.magnitude().clone();
        let top = self.exp2 + magnitude.bits() as i64 - 1;
        let lsb = (top - (prec.p() as i64 - 1)).max(fp::min_lsb_exponent(prec) as i64);
        let shift = lsb - self.exp2;
        let significand: u128 = if shift <= 0 {
            // Already on the grid; fits in p bits.
            (magnitude << (-shift) as u64).to_u128().expect("fits in p bits")
        } else {
            let mut kept = (&magnitude >> shift as u64).to_u128().expect("fits in p bits");
            let half = BigUint::one() << (shift as u64 - 1);
            let rem = &magnitude - (BigUint::from(kept) << shift as u64);
            match rem.cmp(&half) {
                Ordering::Greater => kept += 1,
                Ordering::Equal if kept & 1 == 1 => kept += 1,
                _ => {}
            }
            kept
        };
        let lsb = i32::try_from(lsb).unwrap_or(i32::MAX);
        match fp::compose::<F>(negative, significand, lsb) {
            Some(v) => v,
            None if negative => -F::INFINITY,
            None => F::INFINITY,
        }
    }

    /// Nearest `f64`, for display.
    pub fn to_f64(&self) -> f64 {
        self.round_to::<f64>()
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exp2)
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{} (~{:e})", self.mantissa, self.exp2, self.to_f64())
    }
}

impl<'a> Add<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &'a DyadicRational) -> DyadicRational {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp2.min(rhs.exp2);
        let a = &self.mantissa << (self.exp2 - e) as u64;
        let b = &rhs.mantissa << (rhs.exp2 - e) as u64;
        DyadicRational::new(a + b, e)
    }
}

impl<'a> Sub<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn sub(self, rhs: &'a DyadicRational) -> DyadicRational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a DyadicRational> for &'a DyadicRational {
    type Output = DyadicRational;

    fn mul(self, rhs: &'a DyadicRational) -> DyadicRational {
        if self.is_zero() || rhs.is_zero() {
            return DyadicRational::zero();
        }
        // Product of odd mantissas is odd: already canonical.
        DyadicRational {
            mantissa: &self.mantissa * &rhs.mantissa,
            exp2: self.exp2 + rhs.exp2,
        }
    }
}

impl Neg for &DyadicRational {
    type Output = DyadicRational;

    fn neg(self) -> DyadicRational {
        DyadicRational { mantissa: -&self.mantissa, exp2: self.exp2 }
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;

    fn neg(self) -> DyadicRational {
        DyadicRational { mantissa: -self.mantissa, exp2: self.exp2 }
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        (self - other).signum()
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
