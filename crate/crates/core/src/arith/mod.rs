//! Exact rationals, pi^2-graded values and the high-precision float layer.

mod float;
mod graded;
mod pipoly;
mod rational;
mod scalar;

pub use float::{
    format_float, from_rational, pi, pi_pow2, rational_times_pi_pow2, Precision, DEFAULT_PRECISION, GUARD_BITS,
    MIN_PRECISION,
};
pub use graded::{Graded, PiValue};
pub use pipoly::PiPolynomial;
pub use rational::{
    bernoulli, binomial, double_factorial_odd, factorial, format_rational, zeta_even,
};
pub use rug::{Float as BigFloat, Integer, Rational};
pub use scalar::Scalar;
