pub mod arith;
pub mod asymptotics;
pub mod aseq;
pub mod bracket;
pub mod error;

pub use arith::{BigFloat, Graded, Integer, PiPolynomial, PiValue, Precision, Rational, Scalar};
pub use error::{Error, Result};
