use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) type Entries = SmallVec<[u8; 24]>;

/// Canonical index (g, d) of a bracket: `d` is kept sorted in descending
/// order, so permuted inputs map to the same key.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BracketKey {
    g: u32,
    d: Entries,
}

impl BracketKey {
    /// Validating constructor for external input.
    pub fn new(g: i64, d: &[i64]) -> Result<Self> {
        if g < 0 {
            return Err(Error::invalid(format!("genus must be non-negative, got {g}")));
        }
        if g > 255 {
            return Err(Error::invalid(format!("genus {g} is out of range")));
        }
        let mut entries = Entries::with_capacity(d.len());
        for &x in d {
            if x < 0 {
                return Err(Error::invalid(format!("psi exponents must be non-negative, got {x}")));
            }
            if x > 255 {
                return Err(Error::invalid(format!("psi exponent {x} is out of range")));
            }
            entries.push(x as u8);
        }
        Ok(Self::from_entries(g as u32, entries))
    }

    pub(crate) fn from_entries(g: u32, mut d: Entries) -> Self {
        d.sort_unstable_by(|a, b| b.cmp(a));
        BracketKey { g, d }
    }

    /// Caller guarantees `d` is already sorted descending.
    pub(crate) fn from_sorted(g: u32, d: Entries) -> Self {
        debug_assert!(d.windows(2).all(|w| w[0] >= w[1]));
        BracketKey { g, d }
    }

    /// V_{g,n} = [tau_0^n]_{g,n}.
    pub fn volume(g: u32, n: usize) -> Self {
        BracketKey {
            g,
            d: SmallVec::from_elem(0, n),
        }
    }

    /// [tau_k tau_0^{n-1}]_{g,n}, for n >= 1.
    pub fn tau_k(g: u32, n: usize, k: u8) -> Self {
        assert!(n >= 1, "tau_k needs at least one point");
        let mut d: Entries = SmallVec::from_elem(0, n);
        d[0] = k;
        BracketKey { g, d }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[u8] {
        &self.d
    }

    pub(crate) fn entries(&self) -> &Entries {
        &self.d
    }

    pub fn degree(&self) -> i64 {
        self.d.iter().map(|&x| x as i64).sum()
    }

    /// d_0 = 3g - 3 + n - |d|, the kappa_1 exponent and the pi^2-grade.
    pub fn d0(&self) -> i64 {
        3 * self.g as i64 - 3 + self.n() as i64 - self.degree()
    }

    /// 2g - 2 + n; strictly lowered by every edge of the main recursion.
    pub fn level(&self) -> i64 {
        level(self.g, self.n())
    }

    pub fn is_stable(&self) -> bool {
        self.level() > 0
    }

    /// Unstable or over-dimensional: the bracket vanishes.
    pub fn is_trivially_zero(&self) -> bool {
        !self.is_stable() || self.d0() < 0
    }
}

pub(crate) fn level(g: u32, n: usize) -> i64 {
    2 * g as i64 - 2 + n as i64
}

impl Ord for BracketKey {
    /// By genus, then number of points, then entries.
    fn cmp(&self, other: &Self) -> Ordering {
        self.g
            .cmp(&other.g)
            .then(self.n().cmp(&other.n()))
            .then_with(|| self.d.cmp(&other.d))
    }
}

impl PartialOrd for BracketKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BracketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.d.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "tau_{x}")?;
        }
        write!(f, "]_{{{},{}}}", self.g, self.n())
    }
}

/// Distinct values of a descending multiset with their multiplicities.
pub(crate) fn multiplicities(s: &[u8]) -> SmallVec<[(u8, u32); 8]> {
    let mut out: SmallVec<[(u8, u32); 8]> = SmallVec::new();
    for &x in s {
        match out.last_mut() {
            Some((v, m)) if *v == x => *m += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Inserts `x` into a descending multiset.
pub(crate) fn with_entry(s: &[u8], x: u8) -> Entries {
    let pos = s.iter().position(|&y| y < x).unwrap_or(s.len());
    let mut out = Entries::with_capacity(s.len() + 1);
    out.extend_from_slice(&s[..pos]);
    out.push(x);
    out.extend_from_slice(&s[pos..]);
    out
}

/// Removes one copy of `x` from a descending multiset.
pub(crate) fn without_entry(s: &[u8], x: u8) -> Entries {
    let pos = s.iter().position(|&y| y == x).expect("entry present");
    let mut out = Entries::from_slice(s);
    out.remove(pos);
    out
}

/// All sub-multisets of a multiset given by multiplicities, as count vectors.
/// Calls `f(counts)` in lexicographic order of `counts`.
pub(crate) fn for_each_submultiset(mults: &[(u8, u32)], mut f: impl FnMut(&[u32])) {
    let mut counts: SmallVec<[u32; 8]> = SmallVec::from_elem(0, mults.len());
    loop {
        f(&counts);
        let mut i = mults.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if counts[i] < mults[i].1 {
                counts[i] += 1;
                for c in counts.iter_mut().skip(i + 1) {
                    *c = 0;
                }
                break;
            }
        }
    }
}

/// The multiset with counts `c` drawn from `mults`, descending.
pub(crate) fn from_counts(mults: &[(u8, u32)], c: &[u32]) -> Entries {
    let mut out = Entries::new();
    for ((v, _), &k) in mults.iter().zip(c) {
        for _ in 0..k {
            out.push(*v);
        }
    }
    out
}


/// All descending multisets of `len` entries with sum at most `max_sum`.
pub fn multisets(len: usize, max_sum: i64) -> Vec<Vec<u8>> {
    fn rec(len: usize, cap: u8, budget: i64, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for x in 0..=cap.min(budget.clamp(0, 255) as u8) {
            cur.push(x);
            rec(len, x, budget - x as i64, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if max_sum < 0 {
        return out;
    }
    rec(len, 255, max_sum, &mut Vec::with_capacity(len), &mut out);
    for m in &mut out {
        m.sort_unstable_by(|a, b| b.cmp(a));
    }
    out.sort();
    out.dedup();
    out
}
