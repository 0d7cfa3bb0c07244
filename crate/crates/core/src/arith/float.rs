//! High-precision binary floating point (MPFR) for the numeric side of the
//! crate: oracles, series evaluation and fitting.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 512;
pub const MIN_PRECISION: u32 = 128;

/// Extra working bits used when a value is a product of several rounded
/// factors and the result is rounded once more at the target precision.
pub const GUARD_BITS: u32 = 64;

/// Mantissa precision in bits, at least [`MIN_PRECISION`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Precision(u32);

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_PRECISION {
            return Err(Error::invalid(format!(
                "precision {bits} is below the minimum of {MIN_PRECISION} bits"
            )));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_PRECISION)
    }
}

impl TryFrom<u32> for Precision {
    type Error = Error;
    fn try_from(bits: u32) -> Result<Self> {
        Precision::new(bits)
    }
}

impl From<Precision> for u32 {
    fn from(p: Precision) -> u32 {
        p.0
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// pi^{2k} for any integer `k`.
pub fn pi_pow2(k: i32, prec: u32) -> Float {
    let work = prec + GUARD_BITS;
    let pi2 = Float::with_val(work, pi(work).square_ref());
    let p = Float::with_val(work, pi2.pow(k));
    Float::with_val(prec, p)
}

/// `coeff * pi^{2 grade}` rounded to `prec`.
pub fn rational_times_pi_pow2(coeff: &Rational, grade: i32, prec: u32) -> Float {
    if grade == 0 {
        return Float::with_val(prec, coeff);
    }
    let work = prec + GUARD_BITS;
    let mut x = Float::with_val(work, coeff);
    x *= pi_pow2(grade, work);
    Float::with_val(prec, x)
}

pub fn from_rational(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

/// Decimal rendering with `digits` significant digits.
pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_floor() {
        assert!(Precision::new(127).is_err());
        assert_eq!(Precision::new(128).unwrap().bits(), 128);
        assert_eq!(Precision::default().bits(), 512);
    }

    #[test]
    fn pi_powers() {
        let p = pi_pow2(1, 256);
        let expected = Float::with_val(256, pi(256).square_ref());
        assert_eq!(p, expected);
        let inv = pi_pow2(-1, 256);
        let one = Float::with_val(256, &p * &inv);
        assert!((one - 1u32).abs() < Float::with_val(256, 1e-70));
    }
}
