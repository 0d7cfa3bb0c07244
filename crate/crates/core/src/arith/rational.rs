//! Exact rational helpers: Bernoulli numbers, even zeta values and the
//! factorial-type constants the recursions are written in.

use std::sync::RwLock;

use rug::{Integer, Rational};

use super::PiValue;
use crate::error::{Error, Result};

/// B_0, B_1, B_2, ... with B_1 = -1/2. Grows append-only.
static BERNOULLI: RwLock<Vec<Rational>> = RwLock::new(Vec::new());

/// The Bernoulli number B_m for even `m` (and `m = 1`, which returns the
/// recurrence convention B_1 = -1/2).
///
/// Odd indices above 1 are rejected: the value is zero, and nothing in this
/// crate should ever ask for it.
pub fn bernoulli(m: u32) -> Result<Rational> {
    if m > 1 && m % 2 == 1 {
        return Err(Error::invalid(format!(
            "bernoulli({m}): only even indices are supported"
        )));
    }
    {
        let table = BERNOULLI.read().expect("bernoulli cache poisoned");
        if let Some(b) = table.get(m as usize) {
            return Ok(b.clone());
        }
    }
    let mut table = BERNOULLI.write().expect("bernoulli cache poisoned");
    extend_bernoulli(&mut table, m as usize);
    Ok(table[m as usize].clone())
}

// sum_{k=0}^{m} C(m+1, k) B_k = 0 for m >= 1.
fn extend_bernoulli(table: &mut Vec<Rational>, upto: usize) {
    if table.is_empty() {
        table.push(Rational::from(1));
    }
    while table.len() <= upto {
        let m = table.len();
        if m > 1 && m % 2 == 1 {
            table.push(Rational::new());
            continue;
        }
        let mut acc = Rational::new();
        let mut binom = Integer::from(1); // C(m+1, 0)
        for (k, b) in table.iter().enumerate() {
            if *b != 0 {
                acc += Rational::from(b * &binom);
            }
            binom *= (m + 1 - k) as u32;
            binom /= (k + 1) as u32;
        }
        acc /= (m + 1) as u32;
        table.push(-acc);
    }
}

/// zeta(2l) as an exact multiple of pi^{2l}; zeta(0) = -1/2.
pub fn zeta_even(l: u32) -> PiValue {
    // B_{2l} = (-1)^{l+1} 2 (2l)! zeta(2l) / (2 pi)^{2l}
    let b = bernoulli(2 * l).expect("even index");
    let mut q = b * Rational::from(Integer::from(Integer::u_pow_u(2, 2 * l)));
    q /= Rational::from(Integer::from(Integer::factorial(2 * l)) * 2u32);
    if l.is_multiple_of(2) {
        q = -q;
    }
    PiValue::new(q, l as i32)
}

pub fn factorial(n: u32) -> Integer {
    Integer::from(Integer::factorial(n))
}

/// (2k+1)!! = 1 * 3 * ... * (2k+1).
pub fn double_factorial_odd(k: u32) -> Integer {
    Integer::from(Integer::factorial_2(2 * k + 1))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    Integer::from(Integer::binomial_u(n, k))
}

/// `p/q` for a reduced fraction, or just `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    /// B_m straight from the defining convolution, recomputed from scratch
    /// with binomials taken from Pascal's triangle.
    fn bernoulli_oracle(upto: usize) -> Vec<Rational> {
        let mut pascal = vec![vec![Integer::from(1)]];
        for r in 1..=upto + 1 {
            let prev = &pascal[r - 1];
            let mut row = vec![Integer::from(1); r + 1];
            for k in 1..r {
                row[k] = Integer::from(&prev[k - 1] + &prev[k]);
            }
            pascal.push(row);
        }
        let mut b: Vec<Rational> = vec![rat(1, 1)];
        for m in 1..=upto {
            let mut s = Rational::new();
            for k in 0..m {
                s += Rational::from(&b[k] * &pascal[m + 1][k]);
            }
            b.push(-s / Rational::from(m as i64 + 1));
        }
        b
    }

    #[test]
    fn small_bernoulli_numbers() {
        assert_eq!(bernoulli(0).unwrap(), 1);
        assert_eq!(bernoulli(1).unwrap(), rat(-1, 2));
        assert_eq!(bernoulli(2).unwrap(), rat(1, 6));
        assert_eq!(bernoulli(4).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli(12).unwrap(), rat(-691, 2730));
    }

    #[test]
    fn bernoulli_matches_convolution_oracle() {
        let oracle = bernoulli_oracle(60);
        for m in (0..=60).step_by(2) {
            assert_eq!(bernoulli(m as u32).unwrap(), oracle[m], "B_{m}");
        }
    }

    #[test]
    fn odd_bernoulli_rejected() {
        assert!(matches!(bernoulli(3), Err(Error::InvalidInput(_))));
        assert!(bernoulli(101).is_err());
    }

    #[test]
    fn bernoulli_signs_alternate() {
        for k in 1..=40u32 {
            let b = bernoulli(2 * k).unwrap();
            let expected_positive = k % 2 == 1;
            assert_eq!(b > 0, expected_positive, "sign of B_{}", 2 * k);
        }
    }

    #[test]
    fn even_zeta_values() {
        assert_eq!(zeta_even(0), PiValue::new(rat(-1, 2), 0));
        assert_eq!(zeta_even(1), PiValue::new(rat(1, 6), 1));
        assert_eq!(zeta_even(2), PiValue::new(rat(1, 90), 2));
        assert_eq!(zeta_even(3), PiValue::new(rat(1, 945), 3));
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(0), 1);
        assert_eq!(double_factorial_odd(1), 3);
        assert_eq!(double_factorial_odd(3), 105);
    }
}
