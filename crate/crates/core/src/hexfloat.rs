//! Hexadecimal float literals (`0x1.8p-3`), the canonical output format.

use thiserror::Error;

use crate::fp::BinaryFloat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseFloatError {
    #[error("`{0}` is not a valid float literal")]
    Syntax(String),
    #[error("`{0}` is not exactly representable in {1}")]
    Inexact(String, &'static str),
}

/// Formats a float as a normalized C99-style hex literal with trailing zero
/// digits removed. `f32` values are widened first, so they print exactly as
/// C's `%a` would.
pub fn to_hex<F: BinaryFloat>(x: F) -> String {
    format_f64(x.to_f64())
}

fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    if x == 0.0 {
        return format!("{sign}0x0p+0");
    }
    let bits = x.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i32;
    let mut frac = bits & ((1u64 << 52) - 1);
    let mut exp = field - 1023;
    if field == 0 {
        // Normalize the subnormal so the leading digit is 1.
        let shift = frac.leading_zeros() - 11;
        frac = (frac << shift) & ((1u64 << 52) - 1);
        exp = -1022 - shift as i32;
    }
    let mut digits = format!("{frac:013x}");
    while digits.ends_with('0') {
        digits.pop();
    }
    let exp_sign = if exp < 0 { '-' } else { '+' };
    if digits.is_empty() {
        format!("{sign}0x1p{exp_sign}{}", exp.abs())
    } else {
        format!("{sign}0x1.{digits}p{exp_sign}{}", exp.abs())
    }
}

/// Parses a decimal or hex-float literal into `F`.
///
/// Decimal input is rounded to nearest; hex input must be exact.
pub fn parse_float<F: BinaryFloat>(text: &str) -> Result<F, ParseFloatError> {
    let s = text.trim();
    let unsigned = s.trim_start_matches(['+', '-']);
    let is_hex = unsigned.starts_with("0x") || unsigned.starts_with("0X");
    let syntax = || ParseFloatError::Syntax(text.to_string());
    if is_hex {
        let normalized = normalize_hex(s);
        let wide = hexf_parse::parse_hexf64(&normalized, false).map_err(|_| syntax())?;
        F::from_f64_exact(wide)
            .ok_or_else(|| ParseFloatError::Inexact(text.to_string(), F::PRECISION.name()))
    } else {
        match F::PRECISION {
            crate::fp::Precision::Binary32 => {
                let v: f32 = s.parse().map_err(|_| syntax())?;
                Ok(F::from_f64_exact(v as f64).expect("f32 widens exactly"))
            }
            crate::fp::Precision::Binary64 => {
                let v: f64 = s.parse().map_err(|_| syntax())?;
                Ok(F::from_f64_exact(v).expect("same width"))
            }
        }
    }
}

/// hexf-parse wants a lowercase prefix and an explicit exponent.
fn normalize_hex(s: &str) -> String {
    let mut out = s.replacen("0X", "0x", 1);
    if !out.contains(['p', 'P']) {
        out.push_str("p0");
    }
    out.replace('P', "p")
}
