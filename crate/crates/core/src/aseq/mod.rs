//! The weight sequence a_i = (1 - 2^{1-2i}) zeta(2i) of the main recursion,
//! its differences and the moment sums sum_i i^j (a_{i+1} - a_i).

mod moments;

pub use moments::{moment_exact, moment_partial, DOperatorTable, DRow};

use std::sync::{OnceLock, RwLock};

use rug::{Float, Integer, Rational};

use crate::arith::{zeta_even, PiPolynomial, PiValue};

/// Append-only cache of a_0, a_1, ...
///
/// Readers share the lock; growth takes the write lock, so concurrent
/// extension is serialized and never recomputes an entry twice.
#[derive(Debug, Default)]
pub struct ASeq {
    values: RwLock<Vec<PiValue>>,
}

impl ASeq {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide instance used by the engine.
    pub fn global() -> &'static ASeq {
        static SEQ: OnceLock<ASeq> = OnceLock::new();
        SEQ.get_or_init(ASeq::new)
    }

    pub fn get(&self, i: u32) -> PiValue {
        let idx = i as usize;
        if let Some(v) = self.values.read().expect("a_i cache poisoned").get(idx) {
            return v.clone();
        }
        let mut w = self.values.write().expect("a_i cache poisoned");
        while w.len() <= idx {
            let k = w.len() as u32;
            w.push(compute_a(k));
        }
        w[idx].clone()
    }

    /// a_0..=a_n as a fresh vector.
    pub fn prefix(&self, n: u32) -> Vec<PiValue> {
        self.get(n);
        self.values.read().expect("a_i cache poisoned")[..=n as usize].to_vec()
    }

    pub fn len(&self) -> usize {
        self.values.read().expect("a_i cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn compute_a(i: u32) -> PiValue {
    // 1 - 2^{1-2i} = (2^{2i-1} - 1) / 2^{2i-1}; at i = 0 it is -1.
    let factor = if i == 0 {
        Rational::from(-1)
    } else {
        let p = Integer::from(Integer::u_pow_u(2, 2 * i - 1));
        Rational::from((Integer::from(&p - 1u32), p))
    };
    zeta_even(i).scale(&factor)
}

/// a_i as an exact multiple of pi^{2i}.
pub fn a_coeff(i: u32) -> PiValue {
    ASeq::global().get(i)
}

/// a_{i+1} - a_i, which mixes the grades i and i+1.
pub fn a_diff(i: u32) -> PiPolynomial {
    PiPolynomial::from(a_coeff(i + 1)).sub(&PiPolynomial::from(a_coeff(i)))
}

pub(crate) fn a_diff_float(i: u32, prec: u32) -> Float {
    a_diff(i).to_float(prec)
}
