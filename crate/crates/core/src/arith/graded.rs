use std::fmt;
use std::str::FromStr;

use rug::{Float, Rational};

use super::float::rational_times_pi_pow2;
use super::rational::format_rational;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A single-grade value `coeff * pi^{2 grade}`.
///
/// Zero is always stored with grade 0, so that zero is a neutral element for
/// addition at every grade.
#[derive(Clone, Debug, PartialEq)]
pub struct Graded<S> {
    coeff: S,
    grade: i32,
}

/// Exact single-grade value q * pi^{2k}: the type of every bracket and volume.
pub type PiValue = Graded<Rational>;

impl<S: Scalar> Graded<S> {
    pub fn new(coeff: S, grade: i32) -> Self {
        let grade = if coeff.is_zero() { 0 } else { grade };
        Graded { coeff, grade }
    }

    pub fn zero(ctx: &S::Ctx) -> Self {
        Graded {
            coeff: S::zero(ctx),
            grade: 0,
        }
    }

    pub fn coeff(&self) -> &S {
        &self.coeff
    }

    pub fn grade(&self) -> i32 {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn into_parts(self) -> (S, i32) {
        (self.coeff, self.grade)
    }

    fn check_grades(&self, other: &Self) -> Result<i32> {
        match (self.is_zero(), other.is_zero()) {
            (true, _) => Ok(other.grade),
            (_, true) => Ok(self.grade),
            _ if self.grade == other.grade => Ok(self.grade),
            _ => Err(Error::GradeMismatch {
                left: self.grade,
                right: other.grade,
            }),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.try_add_assign(other)?;
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let grade = self.check_grades(other)?;
        let mut c = self.coeff.clone();
        c.sub_assign_ref(&other.coeff);
        Ok(Graded::new(c, grade))
    }

    pub fn try_add_assign(&mut self, other: &Self) -> Result<()> {
        let grade = self.check_grades(other)?;
        self.coeff.add_assign_ref(&other.coeff);
        self.grade = if self.coeff.is_zero() { 0 } else { grade };
        Ok(())
    }

    /// `self += a * b`, with the same grade discipline as addition.
    pub fn try_add_product(&mut self, a: &Self, b: &Self) -> Result<()> {
        if a.is_zero() || b.is_zero() {
            return Ok(());
        }
        let grade = a.grade + b.grade;
        if !self.is_zero() && self.grade != grade {
            return Err(Error::GradeMismatch {
                left: self.grade,
                right: grade,
            });
        }
        self.coeff.add_product(&a.coeff, &b.coeff);
        self.grade = if self.coeff.is_zero() { 0 } else { grade };
        Ok(())
    }

    /// Multiplies coefficients and adds grades.
    pub fn mul(&self, other: &Self) -> Self {
        Graded::new(self.coeff.mul_ref(&other.coeff), self.grade + other.grade)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let c = self
            .coeff
            .div_ref(&other.coeff)
            .ok_or(Error::DivisionByZero)?;
        Ok(Graded::new(c, self.grade - other.grade))
    }

    /// Multiplies the coefficient by a rational; the grade is unchanged.
    pub fn scale(&self, r: &Rational) -> Self {
        let mut c = self.coeff.clone();
        c.mul_rational(r);
        Graded::new(c, self.grade)
    }

    pub fn scale_assign(&mut self, r: &Rational) {
        self.coeff.mul_rational(r);
        if self.coeff.is_zero() {
            self.grade = 0;
        }
    }

    pub fn scale_i64_assign(&mut self, k: i64) {
        self.coeff.mul_i64(k);
        if self.coeff.is_zero() {
            self.grade = 0;
        }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        let mut c = self.coeff.clone();
        c.mul_i64(k);
        Graded::new(c, self.grade)
    }

    pub fn neg(&self) -> Self {
        let mut c = self.coeff.clone();
        c.neg_assign();
        Graded::new(c, self.grade)
    }

    /// Multiplies by pi^{2k}.
    pub fn shift_grade(&self, k: i32) -> Self {
        Graded::new(self.coeff.clone(), self.grade + k)
    }

    pub fn to_float(&self, prec: u32) -> Float {
        match self.coeff.as_rational() {
            Some(q) => rational_times_pi_pow2(q, self.grade, prec),
            None => {
                let work = prec + super::float::GUARD_BITS;
                let mut x = self.coeff.to_float(work);
                x *= super::float::pi_pow2(self.grade, work);
                Float::with_val(prec, x)
            }
        }
    }
}

impl PiValue {
    pub fn from_int(k: i64, grade: i32) -> Self {
        Graded::new(Rational::from(k), grade)
    }

    pub fn one() -> Self {
        Graded::new(Rational::from(1), 0)
    }

    pub fn rational(&self) -> &Rational {
        &self.coeff
    }
}

impl fmt::Display for PiValue {
    /// `p/q * pi^{2k}`, with the exponent written out as a number.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} * pi^{}",
            format_rational(&self.coeff),
            2 * self.grade
        )
    }
}

impl FromStr for PiValue {
    type Err = Error;

    /// Inverse of `Display`; a bare rational is read as grade 0.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (q, e) = match s.split_once('*') {
            Some((q, rest)) => {
                let rest = rest.trim();
                let e = rest
                    .strip_prefix("pi^")
                    .ok_or_else(|| Error::invalid(format!("cannot parse `{s}` as p/q * pi^e")))?;
                let e: i32 = e
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad pi exponent in `{s}`")))?;
                (q.trim(), e)
            }
            None => (s, 0),
        };
        if e % 2 != 0 {
            return Err(Error::invalid(format!("odd pi exponent in `{s}`")));
        }
        let q: Rational = q
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational in `{s}`")))?;
        Ok(Graded::new(q, e / 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(n: i64, d: i64, k: i32) -> PiValue {
        Graded::new(Rational::from((n, d)), k)
    }

    #[test]
    fn add_same_grade() {
        assert_eq!(pv(1, 2, 1).checked_add(&pv(1, 3, 1)).unwrap(), pv(5, 6, 1));
    }

    #[test]
    fn mul_adds_grades() {
        assert_eq!(pv(2, 1, 1).mul(&pv(3, 1, 2)), pv(6, 1, 3));
    }

    #[test]
    fn grade_mismatch_is_an_error() {
        let err = pv(1, 1, 1).checked_add(&pv(1, 1, 2)).unwrap_err();
        assert!(matches!(err, Error::GradeMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn zero_is_neutral_at_any_grade() {
        let z = PiValue::zero(&());
        assert_eq!(z.grade(), 0);
        assert_eq!(z.checked_add(&pv(3, 4, 5)).unwrap(), pv(3, 4, 5));
        assert_eq!(pv(3, 4, 5).checked_add(&z).unwrap(), pv(3, 4, 5));
        let cancel = pv(1, 2, 3).checked_sub(&pv(1, 2, 3)).unwrap();
        assert_eq!(cancel.grade(), 0);
        assert!(cancel.is_zero());
    }

    #[test]
    fn scale_keeps_grade() {
        let s = pv(1, 3, 2).scale(&Rational::from((3, 5)));
        assert_eq!(s, pv(1, 5, 2));
    }

    #[test]
    fn display_round_trip() {
        for v in [pv(1, 4, 2), pv(-7, 3, 0), pv(5, 1, -1), PiValue::zero(&())] {
            let s = v.to_string();
            assert_eq!(s.parse::<PiValue>().unwrap(), v, "{s}");
        }
        assert_eq!(pv(1, 4, 2).to_string(), "1/4 * pi^4");
        assert!("1/2 * pi^3".parse::<PiValue>().is_err());
    }

    #[test]
    fn float_image() {
        let x = pv(1, 12, 1).to_float(256);
        let pi = super::super::float::pi(256);
        let expect = Float::with_val(256, pi.square_ref()) / 12u32;
        let diff = Float::with_val(256, &x - &expect).abs();
        assert!(diff < Float::with_val(256, 1e-70));
    }
}
