use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock, RwLockReadGuard};

use dashmap::DashMap;
use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use rustc_hash::FxBuildHasher;
use serde::{Deserialize, Serialize};

use super::key::{
    for_each_submultiset, from_counts, level, multiplicities, with_entry, without_entry,
    BracketKey, Entries,
};
use crate::arith::{binomial, factorial, Graded, Scalar};
use crate::aseq::a_coeff;
use crate::error::{Error, Result};

type Map<K, V> = DashMap<K, V, FxBuildHasher>;
type Vector<S> = Arc<Vec<Graded<S>>>;

pub type ExactEngine = Engine<Rational>;
pub type FloatEngine = Engine<Float>;

/// How the sums over splittings (g1, I), (g2, J) are read: over ordered
/// pairs, or over unordered pairs (half the ordered sum).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitReading {
    #[default]
    Ordered,
    Unordered,
}

impl SplitReading {
    pub fn factor(self) -> Rational {
        match self {
            SplitReading::Ordered => Rational::from(1),
            SplitReading::Unordered => Rational::from((1, 2)),
        }
    }
}

/// Values of the brackets at level 1, where the recursion bottoms out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseValues {
    /// [tau_0^3]_{0,3}
    pub tau0_cubed: Rational,
    /// q with [tau_0]_{1,1} = q pi^2
    pub tau0_genus1: Rational,
    /// [tau_1]_{1,1}
    pub tau1_genus1: Rational,
}

impl Default for BaseValues {
    fn default() -> Self {
        BaseValues {
            tau0_cubed: Rational::from(1),
            tau0_genus1: Rational::from((1, 12)),
            tau1_genus1: Rational::from((1, 2)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub base: BaseValues,
    pub reading: SplitReading,
    /// Largest admissible 2g - 2 + n of a requested bracket.
    pub max_level: Option<u32>,
    pub workers: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            base: BaseValues::default(),
            reading: SplitReading::Ordered,
            max_level: None,
            workers: default_workers(),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    pub entries: usize,
    pub rows: usize,
    pub pair_sums: usize,
    pub hits: u64,
    pub misses: u64,
}

/// Outcome of inserting an externally supplied value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preload {
    Inserted,
    Duplicate,
    Conflict,
}

/// Memoized evaluator of the brackets [tau_{d_1} ... tau_{d_n}]_{g,n}.
///
/// Besides the bracket table, two derived tables are kept:
///   rows:      (g, T)  ->  k |-> [tau_k T]_g
///   pair sums: (g, S)  ->  m |-> sum_{k1+k2=m} ( [tau_k1 tau_k2 S]_{g-1}
///                                 + sum over splittings of [tau_k1 I]_{g1} [tau_k2 J]_{g2} )
/// The pair sum depends only on the non-distinguished part S of a key, so
/// the two quadratic terms of the recursion are shared by every d_1.
pub struct Engine<S: Scalar> {
    ctx: S::Ctx,
    config: EngineConfig,
    base: [Graded<S>; 3],
    split_factor: Rational,
    alpha: RwLock<Vec<Graded<S>>>,
    brackets: Map<BracketKey, Arc<Graded<S>>>,
    rows: Map<BracketKey, Vector<S>>,
    pair_sums: Map<BracketKey, Vector<S>>,
    hits: AtomicU64,
    misses: AtomicU64,
    zero: Arc<Graded<S>>,
    pool: rayon::ThreadPool,
}

impl Engine<Rational> {
    pub fn exact(config: EngineConfig) -> Result<Self> {
        Engine::new((), config)
    }
}

impl Engine<Float> {
    pub fn float(prec: u32, config: EngineConfig) -> Result<Self> {
        crate::arith::Precision::new(prec)?;
        Engine::new(prec, config)
    }
}

impl<S: Scalar> Engine<S> {
    pub fn new(ctx: S::Ctx, config: EngineConfig) -> Result<Self> {
        let workers = config.workers.max(1);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .stack_size(64 << 20)
            .thread_name(|i| format!("wpvol-worker-{i}"))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
        let b = &config.base;
        let base = [
            Graded::new(S::from_rational(&b.tau0_cubed, &ctx), 0),
            Graded::new(S::from_rational(&b.tau0_genus1, &ctx), 1),
            Graded::new(S::from_rational(&b.tau1_genus1, &ctx), 0),
        ];
        Ok(Engine {
            zero: Arc::new(Graded::zero(&ctx)),
            split_factor: config.reading.factor(),
            ctx,
            base,
            config,
            alpha: RwLock::new(Vec::new()),
            brackets: Map::default(),
            rows: Map::default(),
            pair_sums: Map::default(),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            pool,
        })
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn stats(&self) -> EngineStats {
        EngineStats {
            entries: self.brackets.len(),
            rows: self.rows.len(),
            pair_sums: self.pair_sums.len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    /// [tau_{d_1} ... tau_{d_n}]_{g,n}; for n = 0 this is V_{g,0}.
    pub fn bracket(&self, g: i64, d: &[i64]) -> Result<Graded<S>> {
        self.bracket_key(&BracketKey::new(g, d)?)
    }

    pub fn bracket_key(&self, key: &BracketKey) -> Result<Graded<S>> {
        self.check_capability(key)?;
        self.pool.install(|| self.get(key)).map(|v| (*v).clone())
    }

    /// V_{g,n}.
    pub fn volume(&self, g: i64, n: i64) -> Result<Graded<S>> {
        if g < 0 || n < 0 {
            return Err(Error::invalid(format!("(g, n) = ({g}, {n}) must be non-negative")));
        }
        if 2 * g - 2 + n <= 0 {
            return Err(Error::invalid(format!("(g, n) = ({g}, {n}) is unstable")));
        }
        if n > 255 || g > 255 {
            return Err(Error::invalid(format!("(g, n) = ({g}, {n}) is out of range")));
        }
        self.bracket_key(&BracketKey::volume(g as u32, n as usize))
    }

    /// V_{g,0} from the one-point brackets [tau_l]_{g,1}.
    pub fn volume_closed(&self, g: i64) -> Result<Graded<S>> {
        if g < 2 {
            return Err(Error::invalid(format!("closed volume needs g >= 2, got {g}")));
        }
        self.volume(g, 0)
    }

    /// Computes the given keys, independent ones concurrently.
    pub fn precompute(&self, keys: &[BracketKey]) -> Result<()> {
        for k in keys {
            self.check_capability(k)?;
        }
        self.pool.install(|| {
            keys.par_iter().try_for_each(|k| self.get(k).map(|_| ()))
        })
    }

    /// [tau_k T]_{g} for all k, starting at k = 0.
    pub fn row(&self, g: u32, rest: &[u8]) -> Result<Vec<Graded<S>>> {
        let mut t = Entries::from_slice(rest);
        t.sort_unstable_by(|a, b| b.cmp(a));
        let probe = BracketKey::from_entries(g, with_entry(&t, 0));
        self.check_capability(&probe)?;
        self.pool
            .install(|| self.row_at(g, &t, i64::MAX))
            .map(|r| (*r).clone())
    }

    /// All computed brackets in key order.
    pub fn snapshot(&self) -> Vec<(BracketKey, Graded<S>)> {
        let mut out: Vec<_> = self
            .brackets
            .iter()
            .map(|e| (e.key().clone(), (**e.value()).clone()))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Inserts a value computed elsewhere, e.g. read from a cache file.
    pub fn preload(&self, key: BracketKey, value: Graded<S>) -> Result<Preload>
    where
        S: PartialEq,
    {
        if !value.is_zero() && value.grade() as i64 != key.d0() {
            return Err(Error::GradeViolation {
                key: key.to_string(),
                expected: key.d0() as i32,
                found: value.grade(),
            });
        }
        use dashmap::mapref::entry::Entry;
        match self.brackets.entry(key) {
            Entry::Occupied(e) => Ok(if **e.get() == value {
                Preload::Duplicate
            } else {
                Preload::Conflict
            }),
            Entry::Vacant(e) => {
                e.insert(Arc::new(value));
                Ok(Preload::Inserted)
            }
        }
    }

    fn check_capability(&self, key: &BracketKey) -> Result<()> {
        let Some(max) = self.config.max_level else {
            return Ok(());
        };
        // V_{g,0} is assembled from one-point brackets one level up.
        let lvl = if key.n() == 0 { key.level() + 1 } else { key.level() };
        if lvl > max as i64 {
            return Err(Error::Capability {
                g: key.g(),
                n: key.n() as u32,
                level: lvl.max(0) as u32,
                max_level: max,
                estimated_keys: estimate_keys(key.g(), key.n()),
            });
        }
        Ok(())
    }

    fn alphas(&self, upto: usize) -> RwLockReadGuard<'_, Vec<Graded<S>>> {
        {
            let r = self.alpha.read().expect("alpha cache poisoned");
            if r.len() > upto {
                return r;
            }
        }
        {
            let mut w = self.alpha.write().expect("alpha cache poisoned");
            while w.len() <= upto {
                let a = a_coeff(w.len() as u32);
                w.push(Graded::new(S::from_rational(a.rational(), &self.ctx), a.grade()));
            }
        }
        self.alpha.read().expect("alpha cache poisoned")
    }

    fn edge(parent: i64, child_key: impl FnOnce() -> (u32, usize), parent_desc: impl FnOnce() -> String) -> Result<()> {
        let (g, n) = child_key();
        if level(g, n) >= parent {
            return Err(Error::NonTerminating {
                parent: parent_desc(),
                child: format!("(g, n) = ({g}, {n})"),
            });
        }
        Ok(())
    }

    pub(crate) fn get(&self, key: &BracketKey) -> Result<Arc<Graded<S>>> {
        if key.is_trivially_zero() {
            return Ok(self.zero.clone());
        }
        if let Some(v) = self.brackets.get(key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(Arc::clone(v.value()));
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let v = self.compute(key)?;
        if !v.is_zero() && v.grade() as i64 != key.d0() {
            return Err(Error::GradeViolation {
                key: key.to_string(),
                expected: key.d0() as i32,
                found: v.grade(),
            });
        }
        let v = Arc::new(v);
        Ok(self.brackets.entry(key.clone()).or_insert(v).clone())
    }

    fn compute(&self, key: &BracketKey) -> Result<Graded<S>> {
        let g = key.g();
        let d = key.entries();
        if d.is_empty() {
            return self.compute_closed(g);
        }
        match (g, d.as_slice()) {
            (0, [0, 0, 0]) => return Ok(self.base[0].clone()),
            (1, [0]) => return Ok(self.base[1].clone()),
            (1, [1]) => return Ok(self.base[2].clone()),
            _ => {}
        }
        let lvl = key.level();
        let d0 = key.d0() as usize;
        let d1 = d[0] as i64;
        let s = &d[1..];
        let alpha = || self.alphas(d0);
        let mut acc = Graded::zero(&self.ctx);

        // Boundary join: tau_{d1} and tau_v merge into tau_{d1+v+l-1}.
        for (v, mult) in multiplicities(s) {
            let rest = without_entry(s, v);
            Self::edge(lvl, || (g, rest.len() + 1), || key.to_string())?;
            let row = self.row_at(g, &rest, lvl)?;
            let start = d1 + v as i64 - 1;
            let mut t = Graded::zero(&self.ctx);
            let a = alpha();
            for l in 0..=d0 {
                let idx = start + l as i64;
                if idx < 0 {
                    continue;
                }
                let Some(r) = row.get(idx as usize) else { break };
                t.try_add_product(&a[l], r)?;
            }
            t.scale_i64_assign(8 * mult as i64 * (2 * v as i64 + 1));
            acc.try_add_assign(&t)?;
        }

        // Cut along a curve: one surface of genus g-1, or two surfaces.
        let u = self.pair_sum(g, s, lvl)?;
        let mut t = Graded::zero(&self.ctx);
        let a = alpha();
        for l in 0..=d0 {
            let m = l as i64 + d1 - 2;
            if m < 0 {
                continue;
            }
            let Some(x) = u.get(m as usize) else { break };
            t.try_add_product(&a[l], x)?;
        }
        t.scale_i64_assign(16);
        acc.try_add_assign(&t)?;
        Ok(acc)
    }

    // (2g-2) V_{g,0} = 1/2 sum_l (-1)^{l-1} l pi^{2l-2} / (2l+1)! [tau_l]_{g,1}
    fn compute_closed(&self, g: u32) -> Result<Graded<S>> {
        let row = self.row_at(g, &[], i64::MAX)?;
        let mut acc = Graded::zero(&self.ctx);
        for l in 1..=(3 * g - 2) {
            let Some(r) = row.get(l as usize) else { break };
            let mut c = Rational::from((Integer::from(l), factorial(2 * l + 1)));
            if l % 2 == 0 {
                c = -c;
            }
            let w = Graded::new(S::from_rational(&c, &self.ctx), l as i32 - 1);
            acc.try_add_product(&w, r)?;
        }
        acc.scale_assign(&Rational::from((1, 4 * (g as i64 - 1))));
        Ok(acc)
    }

    /// [tau_k T]_g for k = 0..=dim, empty when unstable.
    fn row_at(&self, g: u32, t: &[u8], parent_level: i64) -> Result<Vector<S>> {
        let n = t.len() + 1;
        Self::edge(parent_level, || (g, n), || format!("level {parent_level}"))?;
        let rkey = BracketKey::from_sorted(g, Entries::from_slice(t));
        if let Some(r) = self.rows.get(&rkey) {
            return Ok(Arc::clone(r.value()));
        }
        let dim = 3 * g as i64 - 3 + n as i64 - rkey.degree();
        let mut out = Vec::new();
        if level(g, n) > 0 && dim >= 0 {
            let entry = |k: u8| -> Result<Graded<S>> {
                let key = BracketKey::from_sorted(g, with_entry(t, k));
                Ok((*self.get(&key)?).clone())
            };
            // Entries of a row are independent; each value is computed by a
            // fixed sequence of operations, so the worker count cannot change it.
            out = if self.workers() > 1 && dim > 0 {
                (0..=dim as u8).into_par_iter().map(entry).collect::<Result<_>>()?
            } else {
                (0..=dim as u8).map(entry).collect::<Result<_>>()?
            };
        }
        let out = Arc::new(out);
        Ok(self.rows.entry(rkey).or_insert(out).clone())
    }

    /// The shared quadratic part of the recursion for keys (g, {d_1} + S).
    fn pair_sum(&self, g: u32, s: &[u8], parent_level: i64) -> Result<Vector<S>> {
        let ukey = BracketKey::from_sorted(g, Entries::from_slice(s));
        if let Some(u) = self.pair_sums.get(&ukey) {
            return Ok(Arc::clone(u.value()));
        }
        let top = 3 * g as i64 - 4 + s.len() as i64 - ukey.degree();
        if top < 0 {
            let out = Arc::new(Vec::new());
            return Ok(self.pair_sums.entry(ukey).or_insert(out).clone());
        }
        let top = top as usize;
        let mut u: Vec<Graded<S>> = vec![Graded::zero(&self.ctx); top + 1];

        // sum_{k1+k2=m} [tau_k1 tau_k2 S]_{g-1}, pairing k1 < k2 with k2 < k1.
        if g >= 1 {
            for k1 in 0..=top / 2 {
                let rest = with_entry(s, k1 as u8);
                let row = self.row_at(g - 1, &rest, parent_level)?;
                for (m, slot) in u.iter_mut().enumerate().skip(2 * k1) {
                    let Some(x) = row.get(m - k1) else { break };
                    if x.is_zero() {
                        continue;
                    }
                    if m - k1 > k1 {
                        slot.try_add_assign(&x.scale_i64(2))?;
                    } else {
                        slot.try_add_assign(x)?;
                    }
                }
            }
        }

        // Ordered splittings (g1, I), (g2, J) with I + J = S. A splitting and
        // its mirror give the same convolution, so each orbit is done once.
        let mults = multiplicities(s);
        let mut splits: Vec<(u32, Entries, Entries, Rational)> = Vec::new();
        for g1 in 0..=g {
            for_each_submultiset(&mults, |c| {
                let g2 = g - g1;
                let comp: smallvec::SmallVec<[u32; 8]> =
                    mults.iter().zip(c).map(|((_, m), k)| m - k).collect();
                let ord = (g1, c).cmp(&(g2, comp.as_slice()));
                if ord == std::cmp::Ordering::Greater {
                    return;
                }
                let i = from_counts(&mults, c);
                let j = from_counts(&mults, &comp);
                // Both factors must be stable.
                if level(g1, i.len() + 1) <= 0 || level(g2, j.len() + 1) <= 0 {
                    return;
                }
                let mut w = Integer::from(1);
                for ((_, m), k) in mults.iter().zip(c) {
                    w *= binomial(*m, *k);
                }
                if ord == std::cmp::Ordering::Less {
                    w *= 2u32;
                }
                let w = Rational::from(w) * &self.split_factor;
                splits.push((g1, i, j, w));
            });
        }
        for (g1, i, j, w) in &splits {
            let left = self.row_at(*g1, i, parent_level)?;
            let right = self.row_at(g - g1, j, parent_level)?;
            for (k1, a) in left.iter().enumerate().take(top + 1) {
                if a.is_zero() {
                    continue;
                }
                let a = a.scale(w);
                for (slot, b) in u[k1..].iter_mut().zip(right.iter()) {
                    slot.try_add_product(&a, b)?;
                }
            }
        }
        let out = Arc::new(u);
        Ok(self.pair_sums.entry(ukey).or_insert(out).clone())
    }

    /// One application of the main recursion with the entry at `index` as
    /// the distinguished point, written out term by term over labelled
    /// subsets. Children come from the memo table; nothing is grouped. Used
    /// to check that the result does not depend on the choice of index.
    pub fn evaluate_with_index(&self, g: i64, d: &[i64], index: usize) -> Result<Graded<S>> {
        let key = BracketKey::new(g, d)?;
        if index >= d.len() {
            return Err(Error::invalid(format!("index {index} out of range for n = {}", d.len())));
        }
        self.check_capability(&key)?;
        if key.is_trivially_zero() {
            return Ok(Graded::zero(&self.ctx));
        }
        let g = key.g();
        if (g == 0 && d.len() == 3) || (g == 1 && d.len() == 1) {
            return self.bracket_key(&key);
        }
        self.pool.install(|| self.direct(g, d, index))
    }

    fn direct(&self, g: u32, d: &[i64], index: usize) -> Result<Graded<S>> {
        let n = d.len();
        let d0 = (3 * g as i64 - 3 + n as i64 - d.iter().sum::<i64>()) as usize;
        let d1 = d[index];
        let others: Vec<i64> = d.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, &x)| x).collect();
        let a = self.alphas(d0).clone();
        let bracket = |g: u32, e: Vec<i64>| -> Result<Arc<Graded<S>>> {
            self.get(&BracketKey::new(g as i64, &e)?)
        };
        let mut acc = Graded::zero(&self.ctx);
        for (j, &dj) in others.iter().enumerate() {
            for (l, al) in a.iter().enumerate().take(d0 + 1) {
                let idx = d1 + dj + l as i64 - 1;
                if idx < 0 {
                    continue;
                }
                let mut e: Vec<i64> = others.clone();
                e[j] = idx;
                let mut t = al.mul(&*bracket(g, e)?);
                t.scale_i64_assign(8 * (2 * dj + 1));
                acc.try_add_assign(&t)?;
            }
        }
        let cut = others.len();
        for (l, al) in a.iter().enumerate().take(d0 + 1) {
            let m = l as i64 + d1 - 2;
            if m < 0 {
                continue;
            }
            for k1 in 0..=m {
                let k2 = m - k1;
                if g >= 1 {
                    let mut e = others.clone();
                    e.push(k1);
                    e.push(k2);
                    let mut t = al.mul(&*bracket(g - 1, e)?);
                    t.scale_i64_assign(16);
                    acc.try_add_assign(&t)?;
                }
                for g1 in 0..=g {
                    for mask in 0u64..(1u64 << cut) {
                        let mut i = vec![k1];
                        let mut j = vec![k2];
                        for (b, &x) in others.iter().enumerate() {
                            if mask >> b & 1 == 1 {
                                i.push(x);
                            } else {
                                j.push(x);
                            }
                        }
                        let left = bracket(g1, i)?;
                        if left.is_zero() {
                            continue;
                        }
                        let right = bracket(g - g1, j)?;
                        let mut t = al.mul(&left.mul(&right));
                        t.scale_i64_assign(16);
                        t.scale_assign(&self.split_factor);
                        acc.try_add_assign(&t)?;
                    }
                }
            }
        }
        Ok(acc)
    }
}

/// Rough count of the memo entries needed for (g, n): multisets of size
/// n' <= n + (g - g') and degree <= 3g' - 3 + n', summed over g' <= g.
pub fn estimate_keys(g: u32, n: usize) -> u64 {
    let max_n = n + g as usize;
    let max_s = 3 * g as usize + max_n;
    // p[k][s]: partitions of s into parts of size <= k, i.e. into <= k parts.
    let mut p = vec![vec![0u64; max_s + 1]; max_n + 1];
    p[0][0] = 1;
    for k in 1..=max_n {
        for s in 0..=max_s {
            let mut v = p[k - 1][s];
            if s >= k {
                v = v.saturating_add(p[k][s - k]);
            }
            p[k][s] = v;
        }
    }
    let mut total = 0u64;
    for gp in 0..=g as usize {
        for np in 1..=n + (g as usize - gp) {
            let dim = 3 * gp as i64 - 3 + np as i64;
            if dim < 0 || 2 * gp as i64 - 2 + np as i64 <= 0 {
                continue;
            }
            for s in 0..=dim as usize {
                total = total.saturating_add(p[np][s]);
            }
        }
    }
    total
}
