use rug::Float;

use crate::arith::{PiValue, GUARD_BITS};
use crate::bracket::{BracketKey, Engine};
use crate::error::{Error, Result};
use crate::Scalar;

/// Where series values come from: an exact engine, whose ratios are formed
/// exactly and rounded once, or a float engine.
pub trait BracketSource: Sync {
    /// `factor * num / den` (or `factor * num` without `den`) at `prec` bits.
    fn scaled_ratio(&self, num: &BracketKey, den: Option<&BracketKey>, factor: &PiValue, prec: u32)
        -> Result<Float>;

    /// Computes the keys ahead of time, in parallel where possible.
    fn precompute(&self, keys: &[BracketKey]) -> Result<()>;

    /// "exact" or "float".
    fn mode(&self) -> &'static str;

    /// Working precision of the brackets themselves; `None` when exact.
    fn bracket_precision(&self) -> Option<u32>;
}

impl<S: Scalar> BracketSource for Engine<S> {
    fn scaled_ratio(
        &self,
        num: &BracketKey,
        den: Option<&BracketKey>,
        factor: &PiValue,
        prec: u32,
    ) -> Result<Float> {
        let a = self.bracket_key(num)?;
        let b = den.map(|k| self.bracket_key(k)).transpose()?;
        if let Some(b) = &b {
            if b.is_zero() {
                return Err(Error::DivisionByZero);
            }
        }
        if let Some(qa) = a.coeff().as_rational() {
            // Exact quotient, rounded once.
            let mut r = PiValue::new(qa.clone(), a.grade()).mul(factor);
            if let Some(b) = &b {
                let qb = b.coeff().as_rational().expect("same scalar type");
                r = r.checked_div(&PiValue::new(qb.clone(), b.grade()))?;
            }
            return Ok(r.to_float(prec));
        }
        let work = prec + GUARD_BITS;
        let mut x = a.to_float(work);
        if let Some(b) = b {
            x /= b.to_float(work);
        }
        x *= factor.to_float(work);
        Ok(Float::with_val(prec, x))
    }

    fn precompute(&self, keys: &[BracketKey]) -> Result<()> {
        Engine::precompute(self, keys)
    }

    fn mode(&self) -> &'static str {
        match S::precision(self.ctx()) {
            None => "exact",
            Some(_) => "float",
        }
    }

    fn bracket_precision(&self) -> Option<u32> {
        S::precision(self.ctx())
    }
}
