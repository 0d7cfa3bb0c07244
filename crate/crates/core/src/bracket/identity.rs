//! Residuals of the auxiliary recursions, which the main recursion does not
//! use and which therefore test it independently.

use std::fmt;

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use super::engine::Engine;
use super::key::{multisets, BracketKey};
use crate::arith::{factorial, Graded, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Identity {
    /// [tau_0 tau_1 d]_{g,n+2}
    Ia,
    /// [tau_0^2 tau_{l+1} d]_{g,n+3}
    Ib,
    /// (2g - 2 + n) [d]_{g,n} against the one-point insertion sum
    II,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::Ia => "Ia",
            Identity::Ib => "Ib",
            Identity::II => "II",
        })
    }
}

impl std::str::FromStr for Identity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ia" => Ok(Identity::Ia),
            "ib" => Ok(Identity::Ib),
            "ii" => Ok(Identity::II),
            _ => Err(Error::invalid(format!("unknown identity `{s}` (expected Ia, Ib or II)"))),
        }
    }
}

/// One evaluated identity instance.
#[derive(Clone, Debug)]
pub struct IdentityCase<S> {
    pub which: Identity,
    pub g: u32,
    pub d: Vec<u8>,
    pub l: Option<u32>,
    pub residual: Graded<S>,
}

impl<S> fmt::Display for IdentityCase<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} g={} d={:?}", self.which, self.g, self.d)?;
        if let Some(l) = self.l {
            write!(f, " l={l}")?;
        }
        Ok(())
    }
}

fn with(prefix: &[i64], d: &[i64]) -> Vec<i64> {
    prefix.iter().chain(d).copied().collect()
}

/// Left-hand side minus right-hand side; zero when the identity holds.
pub fn check_identity<S: Scalar>(
    engine: &Engine<S>,
    which: Identity,
    g: i64,
    d: &[i64],
    l: Option<i64>,
) -> Result<Graded<S>> {
    // Validates g and d.
    BracketKey::new(g, d)?;
    match which {
        Identity::Ia => residual_ia(engine, g, d),
        Identity::Ib => {
            let l = l.ok_or_else(|| Error::invalid("identity Ib needs the parameter l"))?;
            if l < 0 {
                return Err(Error::invalid(format!("l must be non-negative, got {l}")));
            }
            residual_ib(engine, g, d, l)
        }
        Identity::II => residual_ii(engine, g, d),
    }
}

fn bracket<S: Scalar>(engine: &Engine<S>, g: i64, d: &[i64]) -> Result<Graded<S>> {
    if g < 0 {
        return Ok(Graded::zero(engine.ctx()));
    }
    let key = BracketKey::new(g, d)?;
    if key.d().is_empty() && !key.is_stable() {
        return Ok(Graded::zero(engine.ctx()));
    }
    engine.bracket_key(&key)
}

/// sum over g1 + g2 = g and labelled I + J = {1..n} of f(g1, I) * h(g2, J).
fn split_sum<S: Scalar>(
    engine: &Engine<S>,
    g: i64,
    d: &[i64],
    left: &[i64],
    right: &[i64],
) -> Result<Graded<S>> {
    let mut acc = Graded::zero(engine.ctx());
    for g1 in 0..=g {
        for mask in 0u64..(1u64 << d.len()) {
            let mut i: Vec<i64> = left.to_vec();
            let mut j: Vec<i64> = right.to_vec();
            for (b, &x) in d.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    i.push(x);
                } else {
                    j.push(x);
                }
            }
            let a = bracket(engine, g1, &i)?;
            if a.is_zero() {
                continue;
            }
            let b = bracket(engine, g - g1, &j)?;
            acc.try_add_product(&a, &b)?;
        }
    }
    acc.scale_assign(&engine.config().reading.factor());
    Ok(acc)
}

fn residual_ia<S: Scalar>(engine: &Engine<S>, g: i64, d: &[i64]) -> Result<Graded<S>> {
    let lhs = bracket(engine, g, &with(&[0, 1], d))?;
    let mut rhs = bracket(engine, g - 1, &with(&[0, 0, 0, 0], d))?;
    let mut s = split_sum(engine, g, d, &[0, 0], &[0, 0])?;
    s.scale_i64_assign(6);
    rhs.try_add_assign(&s)?;
    lhs.checked_sub(&rhs)
}

fn residual_ib<S: Scalar>(engine: &Engine<S>, g: i64, d: &[i64], l: i64) -> Result<Graded<S>> {
    let lhs = bracket(engine, g, &with(&[0, 0, l + 1], d))?;
    let mut rhs = bracket(engine, g - 1, &with(&[0, 0, 0, 0, l], d))?;
    let mut s8 = split_sum(engine, g, d, &[0, 0, l], &[0, 0])?;
    s8.scale_i64_assign(8);
    let mut s4 = split_sum(engine, g, d, &[0, l], &[0, 0, 0])?;
    s4.scale_i64_assign(4);
    rhs.try_add_assign(&s8)?;
    rhs.try_add_assign(&s4)?;
    lhs.checked_sub(&rhs)
}

fn residual_ii<S: Scalar>(engine: &Engine<S>, g: i64, d: &[i64]) -> Result<Graded<S>> {
    let n = d.len() as i64;
    if 2 * g - 2 + n <= 0 {
        return Err(Error::invalid(format!("(g, n) = ({g}, {n}) is unstable")));
    }
    let mut lhs = bracket(engine, g, d)?;
    lhs.scale_i64_assign(2 * g - 2 + n);
    let ctx = engine.ctx();
    let mut rhs = Graded::zero(ctx);
    for l in 1..=(3 * g - 2 + n) {
        let b = bracket(engine, g, &with(&[l], d))?;
        if b.is_zero() {
            continue;
        }
        let mut c = Rational::from((Integer::from(l), factorial(2 * l as u32 + 1) * 2u32));
        if l % 2 == 0 {
            c = -c;
        }
        let w = Graded::new(S::from_rational(&c, ctx), l as i32 - 1);
        rhs.try_add_product(&w, &b)?;
    }
    lhs.checked_sub(&rhs)
}

/// Fixed sweep of identity instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityScope {
    /// (II) at every stable (g, n) with 2g - 2 + n up to this.
    pub ii_max_level: i64,
    /// (Ia) at every (g, n) with 2g + n up to this.
    pub ia_max: i64,
    /// (Ib) at every (g, n) with 2g + n up to this.
    pub ib_max: i64,
    pub ib_max_l: i64,
}

impl IdentityScope {
    pub const FULL: IdentityScope = IdentityScope {
        ii_max_level: 12,
        ia_max: 10,
        ib_max: 9,
        ib_max_l: 3,
    };

    pub const SMALL: IdentityScope = IdentityScope {
        ii_max_level: 6,
        ia_max: 6,
        ib_max: 5,
        ib_max_l: 2,
    };

    /// All (identity, g, d, l) instances of the sweep. For (II) the
    /// insertions are tau_0^n, tau_1 tau_0^{n-1} and tau_2 tau_0^{n-1}; for
    /// (Ia) and (Ib) every multiset d that leaves the left-hand side
    /// dimensionally possible.
    pub fn instances(&self) -> Vec<(Identity, i64, Vec<i64>, Option<i64>)> {
        let mut out = Vec::new();
        for g in 0..=self.ii_max_level / 2 + 1 {
            for n in 0..=self.ii_max_level + 2 {
                let lvl = 2 * g - 2 + n;
                if lvl <= 0 || lvl > self.ii_max_level {
                    continue;
                }
                let dim = 3 * g - 3 + n;
                for top in 0..=2i64 {
                    if n == 0 && top > 0 || top > dim {
                        continue;
                    }
                    let mut d = vec![0i64; n as usize];
                    if n > 0 {
                        d[0] = top;
                    }
                    out.push((Identity::II, g, d, None));
                }
            }
        }
        for g in 0..=self.ia_max / 2 {
            for n in 0..=self.ia_max - 2 * g {
                // [tau_0 tau_1 d]_{g,n+2}: |d| + 1 <= 3g - 1 + n
                for d in multisets(n as usize, 3 * g - 2 + n) {
                    out.push((Identity::Ia, g, d.into_iter().map(i64::from).collect(), None));
                }
            }
        }
        for g in 0..=self.ib_max / 2 {
            for n in 0..=self.ib_max - 2 * g {
                for l in 0..=self.ib_max_l {
                    // [tau_0^2 tau_{l+1} d]_{g,n+3}: |d| + l + 1 <= 3g + n
                    for d in multisets(n as usize, 3 * g + n - l - 1) {
                        out.push((Identity::Ib, g, d.into_iter().map(i64::from).collect(), Some(l)));
                    }
                }
            }
        }
        out
    }
}

/// Evaluates every instance of `scope`.
pub fn identity_suite<S: Scalar>(engine: &Engine<S>, scope: IdentityScope) -> Result<Vec<IdentityCase<S>>> {
    scope
        .instances()
        .into_iter()
        .map(|(which, g, d, l)| {
            let residual = check_identity(engine, which, g, &d, l)?;
            Ok(IdentityCase {
                which,
                g: g as u32,
                d: d.iter().map(|&x| x as u8).collect(),
                l: l.map(|x| x as u32),
                residual,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::{EngineConfig, ExactEngine};

    fn engine() -> ExactEngine {
        ExactEngine::exact(EngineConfig { workers: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn documented_instances_vanish() {
        let e = engine();
        assert!(check_identity(&e, Identity::II, 1, &[0], None).unwrap().is_zero());
        assert!(check_identity(&e, Identity::Ia, 2, &[1, 0], None).unwrap().is_zero());
        assert!(check_identity(&e, Identity::Ib, 2, &[2], Some(1)).unwrap().is_zero());
    }

    #[test]
    fn small_sweep_vanishes() {
        let e = engine();
        for case in identity_suite(&e, IdentityScope::SMALL).unwrap() {
            assert!(case.residual.is_zero(), "{case}: {}", case.residual);
        }
    }

    #[test]
    fn ib_requires_l() {
        assert!(check_identity(&engine(), Identity::Ib, 1, &[0], None).is_err());
    }
}
