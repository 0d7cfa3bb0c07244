use std::fmt;

use rug::{Float, Rational};
use serde::Serialize;

use super::series::{series, SeriesKind, SeriesSpec};
use super::source::BracketSource;
use crate::arith::{pi_pow2, Graded, PiValue, Scalar};
use crate::bracket::{BracketKey, Engine, ExactEngine};
use crate::error::{Error, Result};

/// The two sequences whose eventual monotonicity is asserted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonotoneKind {
    /// `V_{g-1,n+2} / V_{g,n}`, for n >= 2.
    GenusInverse,
    /// `8 pi^2 g V_{g,n} / V_{g,n+1}`, for n >= 3.
    PointInverse,
}

impl MonotoneKind {
    pub fn min_n(self) -> u32 {
        match self {
            MonotoneKind::GenusInverse => 2,
            MonotoneKind::PointInverse => 3,
        }
    }

    pub fn series_kind(self, n: u32) -> SeriesKind {
        match self {
            MonotoneKind::GenusInverse => SeriesKind::VRatioG { n },
            MonotoneKind::PointInverse => SeriesKind::VRatioNInverse { n },
        }
    }
}

impl fmt::Display for MonotoneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MonotoneKind::GenusInverse => "genus-inverse",
            MonotoneKind::PointInverse => "point-inverse",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum MonotoneOutcome {
    /// Increasing at every sampled step from `g0` to the end of the range.
    Monotone { g0: u32 },
    NoneFound,
}

/// Smallest `g0` in the range such that the sequence increases for all
/// sampled `g >= g0`.
pub fn monotonicity_scan(
    source: &dyn BracketSource,
    kind: MonotoneKind,
    n: u32,
    g_lo: u32,
    g_hi: u32,
    prec: u32,
) -> Result<MonotoneOutcome> {
    if n < kind.min_n() {
        return Err(Error::invalid(format!("{kind} scan needs n >= {}, got {n}", kind.min_n())));
    }
    if g_lo >= g_hi {
        return Err(Error::invalid(format!("genus range {g_lo}..{g_hi} has no steps")));
    }
    let spec = SeriesSpec::new(kind.series_kind(n), g_lo, g_hi)?;
    let pts = series(source, &spec, prec)?;
    let mut g0 = None;
    for w in pts.windows(2).rev() {
        if w[1].value > w[0].value {
            g0 = Some(w[0].g);
        } else {
            break;
        }
    }
    Ok(match g0 {
        Some(g0) => MonotoneOutcome::Monotone { g0 },
        None => MonotoneOutcome::NoneFound,
    })
}

/// Which side of an inequality a normalized quantity should stay on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Bounded below by a positive constant: the minimum is reported.
    Lower,
    /// Bounded above: the maximum is reported.
    Upper,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessScan {
    pub name: &'static str,
    pub side: Side,
    /// Extreme value over the whole table and where it occurs as (g, n, k).
    pub extreme: f64,
    pub at: (u32, u32, u32),
    /// Extreme value with the two largest genera left out.
    pub extreme_reduced: f64,
    pub count: usize,
    /// Finite, of the right sign for lower bounds, and the full-table value
    /// within a factor 2 of the reduced one.
    pub stable: bool,
}

struct Acc {
    name: &'static str,
    side: Side,
    g_cut: u32,
    full: Option<(f64, (u32, u32, u32))>,
    reduced: Option<f64>,
    count: usize,
    finite: bool,
}

impl Acc {
    fn new(name: &'static str, side: Side, g_cut: u32) -> Self {
        Acc { name, side, g_cut, full: None, reduced: None, count: 0, finite: true }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self.side {
            Side::Lower => a < b,
            Side::Upper => a > b,
        }
    }

    fn push(&mut self, v: f64, at: (u32, u32, u32)) {
        self.count += 1;
        self.finite &= v.is_finite();
        if self.full.is_none_or(|(b, _)| self.better(v, b)) {
            self.full = Some((v, at));
        }
        if at.0 <= self.g_cut && self.reduced.is_none_or(|b| self.better(v, b)) {
            self.reduced = Some(v);
        }
    }

    fn finish(self) -> BoundednessScan {
        let (extreme, at) = self.full.unwrap_or((f64::NAN, (0, 0, 0)));
        let reduced = self.reduced.unwrap_or(extreme);
        let sign_ok = self.side == Side::Upper || extreme > 0.0;
        let ratio = if reduced == 0.0 { f64::INFINITY } else { extreme / reduced };
        BoundednessScan {
            name: self.name,
            side: self.side,
            extreme,
            at,
            extreme_reduced: reduced,
            count: self.count,
            stable: self.finite && self.count > 0 && sign_ok && (0.5..=2.0).contains(&ratio),
        }
    }
}

/// Empirical constants in the three inequalities bounding
/// `1 - [tau_k tau_0^{n-1}]/V`, `(2g-2+n) V_{g,n}/V_{g,n+1}` and
/// `V_{g-1,n+4}/V_{g,n+2}` by multiples of `n/(2g-2+n)`.
pub fn boundedness_scans(
    source: &dyn BracketSource,
    g_lo: u32,
    g_hi: u32,
    n_max: u32,
    k_max: u32,
    prec: u32,
) -> Result<Vec<BoundednessScan>> {
    if g_lo < 1 || g_lo + 2 > g_hi || n_max < 1 {
        return Err(Error::invalid("boundedness scan needs 1 <= g_lo, g_lo + 2 <= g_hi and n_max >= 1"));
    }
    let cut = g_hi - 2;
    let mut lower = Acc::new("tau-deficit-lower", Side::Lower, cut);
    let mut upper = Acc::new("tau-deficit-upper", Side::Upper, cut);
    let mut point = Acc::new("point-ratio-deviation", Side::Upper, cut);
    let mut genus = Acc::new("genus-ratio-gap", Side::Lower, cut);
    let inv4pi2 = Float::with_val(prec, pi_pow2(-1, prec) / 4u32);
    let one = PiValue::one();
    for g in g_lo..=g_hi {
        for n in 1..=n_max {
            let chi = f64::from(2 * g + n - 2);
            let norm = chi / f64::from(n);
            let v = BracketKey::volume(g, n as usize);
            for k in 1..=k_max.min(3 * g + n - 3) {
                let t = BracketKey::tau_k(g, n as usize, k as u8);
                let r = source.scaled_ratio(&t, Some(&v), &one, prec)?;
                let deficit = (1.0 - r.to_f64()) * norm;
                lower.push(deficit, (g, n, k));
                upper.push(deficit / f64::from(k * k), (g, n, k));
            }
            let factor = Graded::new(Rational::from(2 * g + n - 2), 0);
            let x = source.scaled_ratio(&v, Some(&BracketKey::volume(g, n as usize + 1)), &factor, prec)?;
            let dev = Float::with_val(prec, &x - &inv4pi2).abs().to_f64() * norm;
            point.push(dev, (g, n, 0));
            let y = source.scaled_ratio(
                &BracketKey::volume(g - 1, n as usize + 4),
                Some(&BracketKey::volume(g, n as usize + 2)),
                &one,
                prec,
            )?;
            genus.push((1.0 - y.to_f64()) * norm, (g, n, 0));
        }
    }
    Ok(vec![lower.finish(), upper.finish(), point.finish(), genus.finish()])
}

/// A failed instance of an ordering property, as (g, n, k).
pub type Violation = (u32, u32, u32);

/// Checks `[tau_{k+1} tau_0^{n-1}] <= [tau_k tau_0^{n-1}] <= V_{g,n}` for
/// every k at every stable (g, n) with `g <= g_max`, `1 <= n <= n_max`.
pub fn chain_violations<S: Scalar>(engine: &Engine<S>, g_max: u32, n_max: u32) -> Result<Vec<Violation>> {
    let prec = 256;
    let mut out = Vec::new();
    for g in 0..=g_max {
        for n in 1..=n_max {
            if 2 * g + n <= 2 {
                continue;
            }
            let top = 3 * g + n - 3;
            let mut prev = engine.bracket_key(&BracketKey::volume(g, n as usize))?.to_float(prec);
            for k in 0..=top + 1 {
                let cur = engine.bracket_key(&BracketKey::tau_k(g, n as usize, k as u8))?.to_float(prec);
                if cur > prev || cur < 0 {
                    out.push((g, n, k));
                }
                prev = cur;
            }
        }
    }
    Ok(out)
}

/// Weight of the lower bound in the sandwich inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SandwichLower {
    /// `8n`, as the inequality is usually stated.
    Stated,
    /// `8(n-1)`, the weight the (A)-term of the recursion alone supplies.
    OneFewer,
}

impl SandwichLower {
    fn weight(self, n: u32) -> u32 {
        match self {
            SandwichLower::Stated => 8 * n,
            SandwichLower::OneFewer => 8 * (n - 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichViolation {
    pub g: u32,
    pub n: u32,
    pub k: u32,
    /// Which bound failed.
    pub side: Side,
}

/// Checks `w(n) [tau_{k-1} tau_0^{n-2}]_{g,n-1} < [tau_k tau_0^{n-1}] - [tau_{k+1} tau_0^{n-1}]
/// <= 16 ((n+k) V_{g,n-1} + k V_{g-1,n+1})` for `2 <= n <= n_max`,
/// `1 <= k <= min(k_max, 3g-3+n)`.
pub fn sandwich_violations<S: Scalar>(
    engine: &Engine<S>,
    g_lo: u32,
    g_hi: u32,
    n_max: u32,
    k_max: u32,
    lower_weight: SandwichLower,
) -> Result<Vec<SandwichViolation>> {
    let prec = 256;
    let mut out = Vec::new();
    let f = |key: BracketKey| -> Result<Float> { Ok(engine.bracket_key(&key)?.to_float(prec)) };
    for g in g_lo.max(1)..=g_hi {
        for n in 2..=n_max {
            let nn = n as usize;
            for k in 1..=k_max.min(3 * g + n - 3) {
                let lower = f(BracketKey::tau_k(g, nn - 1, (k - 1) as u8))? * lower_weight.weight(n);
                let mid = f(BracketKey::tau_k(g, nn, k as u8))? - f(BracketKey::tau_k(g, nn, (k + 1) as u8))?;
                let upper = (f(BracketKey::volume(g, nn - 1))? * (n + k)
                    + f(BracketKey::volume(g - 1, nn + 1))? * k)
                    * 16u32;
                if !(lower < mid) {
                    out.push(SandwichViolation { g, n, k, side: Side::Lower });
                }
                if !(mid <= upper) {
                    out.push(SandwichViolation { g, n, k, side: Side::Upper });
                }
            }
        }
    }
    Ok(out)
}

/// Both sides of the telescoping identity
/// `V_{g-g',n-n'}/V_{g,n} = prod_j [4pi^2 (2g-2g'+n-j+1) V_{g-g',n+j-1}/V_{g-g',n+j}]
///   * prod_{j=1}^{g'} V_{g-j,n+2j}/V_{g-j+1,n+2j-2} * prod_j 1/(4pi^2 (2g-2g'+n-j+1))`,
/// with the first and last products over `j = -n'+1 ..= 2g'`. Returns LHS - RHS.
pub fn subsurface_residual(engine: &ExactEngine, g: u32, gp: u32, n: u32, np: u32) -> Result<PiValue> {
    if gp > g || np > n || 2 * (g - gp) + (n - np) <= 2 {
        return Err(Error::invalid(format!(
            "subsurface tuple (g, g', n, n') = ({g}, {gp}, {n}, {np}) leaves an unstable surface"
        )));
    }
    if 2 * (g - gp) + n < 2 * gp {
        // Some factor 2g - 2g' + n - j + 1 of the products would vanish.
        return Err(Error::invalid(format!(
            "subsurface tuple (g, g', n, n') = ({g}, {gp}, {n}, {np}) needs 2(g - g') + n >= 2g'"
        )));
    }
    let vol = |g: i64, n: i64| engine.volume(g, n);
    let (g, gp, n, np) = (i64::from(g), i64::from(gp), i64::from(n), i64::from(np));
    let lhs = vol(g - gp, n - np)?.checked_div(&vol(g, n)?)?;
    let mut rhs = PiValue::one();
    for j in (-np + 1)..=(2 * gp) {
        let c = PiValue::from_int(4 * (2 * g - 2 * gp + n - j + 1), 1);
        let r = vol(g - gp, n + j - 1)?.checked_div(&vol(g - gp, n + j)?)?;
        rhs = rhs.mul(&c.mul(&r));
    }
    for j in 1..=gp {
        rhs = rhs.mul(&vol(g - j, n + 2 * j)?.checked_div(&vol(g - j + 1, n + 2 * j - 2)?)?);
    }
    for j in (-np + 1)..=(2 * gp) {
        let c = PiValue::from_int(4 * (2 * g - 2 * gp + n - j + 1), 1);
        rhs = rhs.checked_div(&c)?;
    }
    lhs.checked_sub(&rhs)
}
