use rug::Float;
use serde::Serialize;

use super::fit::{fit_expansion, FitMethod};
use super::series::{series, SeriesKind, SeriesPoint, SeriesSpec};
use super::source::BracketSource;
use crate::arith::format_float;
use crate::error::{Error, Result};

/// Default and spread for the expansion order used when extrapolating the
/// normalized volume.
pub const C_ORDER: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct CEstimate {
    pub n: u32,
    pub window: (u32, u32),
    pub precision: u32,
    pub order: usize,
    #[serde(serialize_with = "ser")]
    pub value: Float,
    /// Spread over neighbouring orders, shortened windows and fit methods.
    #[serde(serialize_with = "ser")]
    pub uncertainty: Float,
    pub increments: IncrementWitness,
}

fn ser<S: serde::Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_float(x, 30))
}

impl CEstimate {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
    pub fn uncertainty_f64(&self) -> f64 {
        self.uncertainty.to_f64()
    }
}

/// `|x_{g+1} - x_g| g^2` along the normalized-volume series.
#[derive(Clone, Debug, Serialize)]
pub struct IncrementWitness {
    pub values: Vec<(u32, f64)>,
    pub max: f64,
    /// Max over the upper half of the range is at most twice the max over
    /// the lower half, and everything is finite.
    pub bounded: bool,
}

pub fn increment_witness(points: &[SeriesPoint]) -> IncrementWitness {
    let values: Vec<(u32, f64)> = points
        .windows(2)
        .map(|w| {
            let d = Float::with_val(w[0].value.prec(), &w[1].value - &w[0].value).abs();
            let g = f64::from(w[0].g);
            (w[0].g, d.to_f64() * g * g)
        })
        .collect();
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    let half = values.len() / 2;
    let lo = values[..half].iter().map(|v| v.1).fold(0.0, f64::max);
    let hi = values[half..].iter().map(|v| v.1).fold(0.0, f64::max);
    let bounded = values.iter().all(|v| v.1.is_finite()) && (half == 0 || hi <= 2.0 * lo);
    IncrementWitness { values, max, bounded }
}

/// Extrapolates `V_{g,n} sqrt(g) / ((2g-3+n)! (4 pi^2)^{2g-3+n})` to its
/// limit over the genus window.
pub fn estimate_c(source: &dyn BracketSource, n: u32, g_lo: u32, g_hi: u32, prec: u32) -> Result<CEstimate> {
    estimate_c_with_order(source, n, g_lo, g_hi, prec, C_ORDER)
}

pub fn estimate_c_with_order(
    source: &dyn BracketSource,
    n: u32,
    g_lo: u32,
    g_hi: u32,
    prec: u32,
    order: usize,
) -> Result<CEstimate> {
    let spec = SeriesSpec::new(SeriesKind::NormVolume { n }, g_lo, g_hi)?;
    let pts = series(source, &spec, prec)?;
    if pts.len() < order + 4 {
        return Err(Error::NotEnoughPoints { needed: order + 4, got: pts.len() });
    }
    let main = fit_expansion(&pts, order, FitMethod::Richardson)?;
    let value = main.u(0).clone();
    let mut unc = main.uncertainty[0].clone();
    let len = pts.len();
    let mut variants = Vec::new();
    for k in [order - 1, order + 1] {
        if len >= k + 2 && k >= 1 {
            variants.push(fit_expansion(&pts, k, FitMethod::Richardson)?);
        }
    }
    variants.push(fit_expansion(&pts[..len - 2], order, FitMethod::Richardson)?);
    let mut spread = Float::new(prec);
    for v in &variants {
        let d = Float::with_val(prec, v.u(0) - &value).abs();
        if d > spread {
            spread = d;
        }
    }
    unc += spread;
    Ok(CEstimate {
        n,
        window: (g_lo, g_hi),
        precision: prec,
        order,
        value,
        uncertainty: unc,
        increments: increment_witness(&pts),
    })
}

/// How the number of boundary components grows with the genus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Constant(u32),
    /// `floor(g^{1/3})`
    CubeRoot,
    /// `n = g`
    Linear,
}

impl Schedule {
    pub fn n(self, g: u32) -> u32 {
        match self {
            Schedule::Constant(n) => n,
            Schedule::CubeRoot => (0..=g).take_while(|m| m * m * m <= g).last().unwrap_or(0),
            Schedule::Linear => g,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariablePoint {
    pub g: u32,
    pub n: u32,
    pub value: Float,
}

/// `V_{g,n(g)} / C_{g,n(g)}` with `C_{g,n} = (2g-3+n)! (4 pi^2)^{2g-3+n} / sqrt(g)`.
pub fn variable_n_check(
    source: &dyn BracketSource,
    schedule: Schedule,
    g_lo: u32,
    g_hi: u32,
    prec: u32,
) -> Result<Vec<VariablePoint>> {
    if g_lo > g_hi {
        return Err(Error::invalid(format!("empty genus range {g_lo}..{g_hi}")));
    }
    let kinds: Vec<(u32, SeriesKind)> = (g_lo..=g_hi)
        .map(|g| (g, SeriesKind::NormVolume { n: schedule.n(g) }))
        .collect();
    for (g, kind) in &kinds {
        if *g < kind.min_genus() {
            return Err(Error::invalid(format!("{kind} is undefined at g = {g}")));
        }
    }
    let keys: Vec<_> = kinds.iter().flat_map(|(g, k)| k.keys(*g)).collect();
    source.precompute(&keys)?;
    kinds
        .into_iter()
        .map(|(g, kind)| Ok(VariablePoint { g, n: kind.n(), value: kind.term(source, g, prec)? }))
        .collect()
}

/// Largest `|x_g - x_last|` over the points from genus `from` on.
pub fn tail_deviation(points: &[VariablePoint], from: u32) -> f64 {
    let last = match points.last() {
        Some(p) => p.value.to_f64(),
        None => return 0.0,
    };
    points
        .iter()
        .filter(|p| p.g >= from)
        .map(|p| (p.value.to_f64() - last).abs())
        .fold(0.0, f64::max)
}
