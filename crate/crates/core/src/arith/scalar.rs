use std::fmt;

use rug::{Float, Rational};

/// Field operations the bracket engine is generic over: exact rationals, or
/// fixed-precision binary floats for pushing to larger genus.
///
/// Values carry only the rational (or float) coefficient of a pi^2 power;
/// the grade lives in [`Graded`](super::Graded).
pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    /// Construction context: nothing for rationals, the precision for floats.
    type Ctx: Clone + fmt::Debug + Send + Sync + 'static;

    fn zero(ctx: &Self::Ctx) -> Self;
    fn from_rational(value: &Rational, ctx: &Self::Ctx) -> Self;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn sub_assign_ref(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self);
    /// `None` when `rhs` is zero.
    fn div_ref(&self, rhs: &Self) -> Option<Self>;
    fn mul_rational(&mut self, r: &Rational);
    fn mul_i64(&mut self, k: i64);
    fn neg_assign(&mut self);
    fn to_float(&self, prec: u32) -> Float;
    /// Exact value, when the representation has one.
    fn as_rational(&self) -> Option<&Rational>;
    /// Context this value was built under.
    fn ctx(&self) -> Self::Ctx;
    /// Working precision in bits; `None` when exact.
    fn precision(ctx: &Self::Ctx) -> Option<u32>;
}

impl Scalar for Rational {
    type Ctx = ();

    fn precision(_: &()) -> Option<u32> {
        None
    }

    fn zero(_: &()) -> Self {
        Rational::new()
    }
    fn from_rational(value: &Rational, _: &()) -> Self {
        value.clone()
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
    fn is_negative(&self) -> bool {
        *self.numer() < 0
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        Rational::from(self * rhs)
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        let p = Rational::from(a * b);
        *self += p;
    }
    fn div_ref(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            None
        } else {
            Some(Rational::from(self / rhs))
        }
    }
    fn mul_rational(&mut self, r: &Rational) {
        *self *= r;
    }
    fn mul_i64(&mut self, k: i64) {
        *self *= k;
    }
    fn neg_assign(&mut self) {
        let v = std::mem::take(self);
        *self = -v;
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn as_rational(&self) -> Option<&Rational> {
        Some(self)
    }
    fn ctx(&self) {}
}

impl Scalar for Float {
    type Ctx = u32;

    fn precision(ctx: &u32) -> Option<u32> {
        Some(*ctx)
    }

    fn zero(prec: &u32) -> Self {
        Float::new(*prec)
    }
    fn from_rational(value: &Rational, prec: &u32) -> Self {
        Float::with_val(*prec, value)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        self.is_sign_negative() && !Float::is_zero(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        Float::with_val(self.prec(), self * rhs)
    }
    fn add_product(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn div_ref(&self, rhs: &Self) -> Option<Self> {
        if Float::is_zero(rhs) {
            None
        } else {
            Some(Float::with_val(self.prec(), self / rhs))
        }
    }
    fn mul_rational(&mut self, r: &Rational) {
        *self *= r;
    }
    fn mul_i64(&mut self, k: i64) {
        *self *= k;
    }
    fn neg_assign(&mut self) {
        rug::ops::NegAssign::neg_assign(self);
    }
    fn to_float(&self, prec: u32) -> Float {
        Float::with_val(prec, self)
    }
    fn as_rational(&self) -> Option<&Rational> {
        None
    }
    fn ctx(&self) -> u32 {
        self.prec()
    }
}
