use std::collections::BTreeMap;

use rug::{Float, Rational};

use super::engine::ExactEngine;
use super::key::{multisets, BracketKey};
use crate::arith::{factorial, PiValue};
use crate::error::{Error, Result};

/// V_{g,n}(2L) = sum_d [tau_d]_{g,n} prod_i L_i^{2 d_i} / (2 d_i + 1)!.
///
/// Coefficients are symmetric in the L_i, so only descending exponent
/// multisets are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumePolynomial {
    g: u32,
    n: usize,
    coeffs: BTreeMap<Vec<u8>, PiValue>,
}

impl VolumePolynomial {
    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// (descending d, coefficient of prod L_i^{2 d_i}).
    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &PiValue)> {
        self.coeffs.iter().map(|(d, c)| (d.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of prod L_i^{e_i}; odd exponents have coefficient zero.
    pub fn coefficient(&self, exponents: &[u32]) -> Result<PiValue> {
        if exponents.len() != self.n {
            return Err(Error::invalid(format!(
                "expected {} exponents, got {}",
                self.n,
                exponents.len()
            )));
        }
        if exponents.iter().any(|e| e % 2 == 1) {
            return Ok(PiValue::zero(&()));
        }
        let mut d: Vec<u8> = exponents.iter().map(|&e| (e / 2).min(255) as u8).collect();
        d.sort_unstable_by(|a, b| b.cmp(a));
        Ok(self.coeffs.get(&d).cloned().unwrap_or_else(|| PiValue::zero(&())))
    }

    pub fn constant_term(&self) -> PiValue {
        self.coeffs
            .get(&vec![0u8; self.n])
            .cloned()
            .unwrap_or_else(|| PiValue::zero(&()))
    }

    /// V_{g,n}(2L) at the given L.
    pub fn evaluate(&self, l: &[Float]) -> Result<Float> {
        if l.len() != self.n {
            return Err(Error::invalid(format!("expected {} lengths, got {}", self.n, l.len())));
        }
        let prec = l.iter().map(|x| x.prec()).max().unwrap_or(128);
        let mut acc = Float::new(prec);
        for (d, c) in &self.coeffs {
            // Sum over the distinct orderings of the multiset d.
            let c = c.to_float(prec);
            for perm in distinct_permutations(d) {
                let mut t = c.clone();
                for (x, &k) in l.iter().zip(&perm) {
                    t *= Float::with_val(prec, rug::ops::Pow::pow(x, 2 * k as u32));
                }
                acc += t;
            }
        }
        Ok(acc)
    }
}

fn distinct_permutations(d: &[u8]) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = d.to_vec();
    cur.sort_unstable();
    let mut out = vec![cur.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (0..cur.len().saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..cur.len()).rev().find(|&j| cur[j] > cur[i]).expect("pivot");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// The full volume polynomial of (g, n), n >= 1.
pub fn volume_polynomial(engine: &ExactEngine, g: i64, n: i64) -> Result<VolumePolynomial> {
    if g < 0 || n < 1 || 2 * g - 2 + n <= 0 {
        return Err(Error::invalid(format!(
            "volume polynomial needs n >= 1 and a stable (g, n), got ({g}, {n})"
        )));
    }
    let dim = 3 * g - 3 + n;
    let mut coeffs = BTreeMap::new();
    for d in multisets(n as usize, dim) {
        let key = BracketKey::new(g, &d.iter().map(|&x| x as i64).collect::<Vec<_>>())?;
        let b = engine.bracket_key(&key)?;
        if b.is_zero() {
            continue;
        }
        let mut denom = rug::Integer::from(1);
        for &x in &d {
            denom *= factorial(2 * x as u32 + 1);
        }
        coeffs.insert(d, b.scale(&Rational::from((1, denom))));
    }
    Ok(VolumePolynomial {
        g: g as u32,
        n: n as usize,
        coeffs,
    })
}
