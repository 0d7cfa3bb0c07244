use std::collections::BTreeMap;
use std::fmt;

use rug::{Float, Rational};

use super::float::{pi_pow2, GUARD_BITS};
use super::rational::format_rational;
use super::PiValue;

/// Finite Laurent polynomial `sum_k q_k pi^{2k}` with rational coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PiPolynomial {
    terms: BTreeMap<i32, Rational>,
}

impl PiPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Rational) -> Self {
        Self::monomial(q, 0)
    }

    pub fn monomial(q: Rational, grade: i32) -> Self {
        let mut p = Self::zero();
        p.add_term(grade, &q);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (i32, Rational)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, q) in terms {
            p.add_term(k, &q);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, grade: i32) -> Rational {
        self.terms.get(&grade).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(k, q)| (*k, q))
    }

    pub fn max_grade(&self) -> Option<i32> {
        self.terms.keys().next_back().copied()
    }

    pub fn min_grade(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn add_term(&mut self, grade: i32, q: &Rational) {
        if *q == 0 {
            return;
        }
        let slot = self.terms.entry(grade).or_default();
        *slot += q;
        if *slot == 0 {
            self.terms.remove(&grade);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, q) in &other.terms {
            out.add_term(*k, q);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PiPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(k, q)| (*k, Rational::from(-q)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                out.add_term(a + b, &Rational::from(p * q));
            }
        }
        out
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if *r == 0 {
            return Self::zero();
        }
        PiPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(k, q)| (*k, Rational::from(q * r)))
                .collect(),
        }
    }

    /// Multiplies by pi^{2k}.
    pub fn shift(&self, k: i32) -> Self {
        PiPolynomial {
            terms: self.terms.iter().map(|(g, q)| (g + k, q.clone())).collect(),
        }
    }

    pub fn to_float(&self, prec: u32) -> Float {
        // Summed at extra precision so cancellation between grades is
        // absorbed by the guard bits before the final rounding.
        let work = prec + 2 * GUARD_BITS;
        let mut acc = Float::new(work);
        for (k, q) in &self.terms {
            let mut t = Float::with_val(work, q);
            if *k != 0 {
                t *= pi_pow2(*k, work);
            }
            acc += t;
        }
        Float::with_val(prec, acc)
    }
}

impl From<PiValue> for PiPolynomial {
    fn from(v: PiValue) -> Self {
        let (q, k) = v.into_parts();
        PiPolynomial::monomial(q, k)
    }
}

impl From<&PiValue> for PiPolynomial {
    fn from(v: &PiValue) -> Self {
        PiPolynomial::monomial(v.rational().clone(), v.grade())
    }
}

impl fmt::Display for PiPolynomial {
    /// Terms in increasing grade, each as `p/q * pi^{2k}`, joined by ` + `.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, q)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} * pi^{}", format_rational(q), 2 * k)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn no_zero_terms() {
        let p = PiPolynomial::from_terms([(1, r(1, 2)), (0, r(0, 1)), (1, r(-1, 2))]);
        assert!(p.is_zero());
        assert_eq!(p.max_grade(), None);
    }

    #[test]
    fn laurent_product() {
        // (1 + pi^-2)(1 - pi^-2) = 1 - pi^-4
        let a = PiPolynomial::from_terms([(0, r(1, 1)), (-1, r(1, 1))]);
        let b = PiPolynomial::from_terms([(0, r(1, 1)), (-1, r(-1, 1))]);
        let p = a.mul(&b);
        assert_eq!(p, PiPolynomial::from_terms([(0, r(1, 1)), (-2, r(-1, 1))]));
        assert_eq!(p.min_grade(), Some(-2));
    }

    #[test]
    fn float_value() {
        let p = PiPolynomial::from_terms([(0, r(7, 12)), (-1, r(-17, 6))]);
        let x = p.to_float(200).to_f64();
        assert!((x - 0.296_256_646_346_709_7).abs() < 1e-15, "{x}");
    }
}
