use std::fmt;
use std::str::FromStr;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::source::BracketSource;
use crate::arith::{factorial, Graded, PiValue};
use crate::bracket::BracketKey;
use crate::error::{Error, Result};

/// The ratio sequences studied in the large-genus regime. Each is `1 + O(1/g)`
/// except the normalized volume, which tends to a finite constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeriesKind {
    /// `V_{g,n+1} / (8 pi^2 g V_{g,n})`
    VRatioN { n: u32 },
    /// `8 pi^2 g V_{g,n} / V_{g,n+1}`
    VRatioNInverse { n: u32 },
    /// `V_{g-1,n+2} / V_{g,n}`
    VRatioG { n: u32 },
    /// `4 pi^2 (2g-2+n) V_{g,n} / V_{g,n+1}`
    EulerRatio { n: u32 },
    /// `[tau_k tau_0^{n-1}]_{g,n} / V_{g,n}`
    TauRatio { n: u32, k: u32 },
    /// `[tau_{k+1} tau_0^{n-1}]_{g,n} / [tau_k tau_0^{n-1}]_{g,n}`
    TauStep { n: u32, k: u32 },
    /// `V_{g,n} sqrt(g) / ((2g-3+n)! (4 pi^2)^{2g-3+n})`
    NormVolume { n: u32 },
    /// `V_{g+1,n} / V_{g,n}` divided by `(4pi^2)^2 (2g+n-1)(2g+n-2)(1-1/(2g))`
    GenusStep { n: u32 },
}

impl SeriesKind {
    pub fn name(&self) -> &'static str {
        match self {
            SeriesKind::VRatioN { .. } => "v-ratio-n",
            SeriesKind::VRatioNInverse { .. } => "v-ratio-n-inverse",
            SeriesKind::VRatioG { .. } => "v-ratio-g",
            SeriesKind::EulerRatio { .. } => "euler-ratio",
            SeriesKind::TauRatio { .. } => "tau-ratio",
            SeriesKind::TauStep { .. } => "tau-step",
            SeriesKind::NormVolume { .. } => "norm-volume",
            SeriesKind::GenusStep { .. } => "genus-step",
        }
    }

    /// Builds a kind from its command-line name. `k` is required for the
    /// tau kinds and rejected elsewhere.
    pub fn from_name(name: &str, n: u32, k: Option<u32>) -> Result<Self> {
        let need_k = || k.ok_or_else(|| Error::invalid(format!("series `{name}` needs --k")));
        let kind = match name.replace('_', "-").as_str() {
            "v-ratio-n" => SeriesKind::VRatioN { n },
            "v-ratio-n-inverse" => SeriesKind::VRatioNInverse { n },
            "v-ratio-g" => SeriesKind::VRatioG { n },
            "euler-ratio" => SeriesKind::EulerRatio { n },
            "tau-ratio" => SeriesKind::TauRatio { n, k: need_k()? },
            "tau-step" => SeriesKind::TauStep { n, k: need_k()? },
            "norm-volume" => SeriesKind::NormVolume { n },
            "genus-step" => SeriesKind::GenusStep { n },
            _ => return Err(Error::invalid(format!("unknown series `{name}`"))),
        };
        if k.is_some() && !matches!(kind, SeriesKind::TauRatio { .. } | SeriesKind::TauStep { .. }) {
            return Err(Error::invalid(format!("series `{name}` takes no k")));
        }
        if let SeriesKind::TauRatio { n: 0, .. } | SeriesKind::TauStep { n: 0, .. } = kind {
            return Err(Error::invalid("tau series need n >= 1"));
        }
        Ok(kind)
    }

    pub fn n(&self) -> u32 {
        match *self {
            SeriesKind::VRatioN { n }
            | SeriesKind::VRatioNInverse { n }
            | SeriesKind::VRatioG { n }
            | SeriesKind::EulerRatio { n }
            | SeriesKind::TauRatio { n, .. }
            | SeriesKind::TauStep { n, .. }
            | SeriesKind::NormVolume { n }
            | SeriesKind::GenusStep { n } => n,
        }
    }

    pub fn k(&self) -> Option<u32> {
        match *self {
            SeriesKind::TauRatio { k, .. } | SeriesKind::TauStep { k, .. } => Some(k),
            _ => None,
        }
    }

    /// Smallest genus at which every bracket in the term is defined.
    pub fn min_genus(&self) -> u32 {
        let n = self.n();
        let stable = |g: u32, n: u32| 2 * g + n > 2;
        let ok = |g: u32| -> bool {
            match *self {
                SeriesKind::VRatioN { n }
                | SeriesKind::VRatioNInverse { n }
                | SeriesKind::EulerRatio { n } => stable(g, n) && g >= 1,
                SeriesKind::VRatioG { n } => g >= 1 && stable(g, n) && stable(g - 1, n + 2),
                SeriesKind::TauRatio { n, k } => stable(g, n) && k <= 3 * g + n - 3,
                SeriesKind::TauStep { n, k } => stable(g, n) && k < 3 * g + n - 3,
                SeriesKind::NormVolume { n } => g >= 1 && stable(g, n),
                // The normalizer vanishes at g = 1, n = 0; V_{1,0} is unstable anyway.
                SeriesKind::GenusStep { n } => g >= 1 && stable(g, n),
            }
        };
        let _ = n;
        (0..).find(|&g| ok(g)).expect("some genus works")
    }

    /// The brackets entering the term at genus `g`.
    pub fn keys(&self, g: u32) -> Vec<BracketKey> {
        let v = |g: u32, n: u32| BracketKey::volume(g, n as usize);
        let tau = |g: u32, n: u32, k: u32| BracketKey::tau_k(g, n as usize, k as u8);
        match *self {
            SeriesKind::VRatioN { n }
            | SeriesKind::VRatioNInverse { n }
            | SeriesKind::EulerRatio { n } => vec![v(g, n + 1), v(g, n)],
            SeriesKind::VRatioG { n } => vec![v(g - 1, n + 2), v(g, n)],
            SeriesKind::TauRatio { n, k } => vec![tau(g, n, k), v(g, n)],
            SeriesKind::TauStep { n, k } => vec![tau(g, n, k + 1), tau(g, n, k)],
            SeriesKind::NormVolume { n } => vec![v(g, n)],
            SeriesKind::GenusStep { n } => vec![v(g + 1, n), v(g, n)],
        }
    }

    /// The term at genus `g`.
    pub fn term(&self, source: &dyn BracketSource, g: u32, prec: u32) -> Result<Float> {
        let keys = self.keys(g);
        let gi = i64::from(g);
        let ni = i64::from(self.n());
        let q = |num: i64, den: i64, grade: i32| Graded::new(Rational::from((num, den)), grade);
        match *self {
            SeriesKind::VRatioN { .. } => source.scaled_ratio(&keys[0], Some(&keys[1]), &q(1, 8 * gi, -1), prec),
            SeriesKind::VRatioNInverse { .. } => {
                source.scaled_ratio(&keys[1], Some(&keys[0]), &q(8 * gi, 1, 1), prec)
            }
            SeriesKind::EulerRatio { .. } => {
                source.scaled_ratio(&keys[1], Some(&keys[0]), &q(4 * (2 * gi - 2 + ni), 1, 1), prec)
            }
            SeriesKind::VRatioG { .. } | SeriesKind::TauRatio { .. } | SeriesKind::TauStep { .. } => {
                source.scaled_ratio(&keys[0], Some(&keys[1]), &PiValue::one(), prec)
            }
            SeriesKind::GenusStep { .. } => {
                // (4pi^2)^2 (2g+n-1)(2g+n-2)(2g-1)/(2g)
                let m = (2 * gi + ni - 1) * (2 * gi + ni - 2) * (2 * gi - 1);
                if m == 0 {
                    return Err(Error::invalid("genus-step normalizer vanishes"));
                }
                source.scaled_ratio(&keys[0], Some(&keys[1]), &q(2 * gi, 16 * m, -2), prec)
            }
            SeriesKind::NormVolume { n } => {
                let mut x = source.scaled_ratio(&keys[0], None, &norm_divisor_inverse(g, n)?, prec + 32)?;
                x *= Float::with_val(prec + 32, g).sqrt();
                Ok(Float::with_val(prec, x))
            }
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}", self.name(), self.n())?;
        if let Some(k) = self.k() {
            write!(f, ",k={k}")?;
        }
        write!(f, ")")
    }
}

/// `1 / ((2g-3+n)! (4 pi^2)^{2g-3+n})` as an exact value.
pub(crate) fn norm_divisor_inverse(g: u32, n: u32) -> Result<PiValue> {
    let m = 2 * i64::from(g) - 3 + i64::from(n);
    if m < 0 {
        return Err(Error::invalid(format!("normalizer undefined at g={g}, n={n}")));
    }
    let den = factorial(m as u32) * Integer::from(Integer::u_pow_u(4, m as u32));
    Ok(Graded::new(Rational::from((Integer::from(1), den)), -(m as i32)))
}

/// A series with a genus range, endpoints inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub g_lo: u32,
    pub g_hi: u32,
}

impl SeriesSpec {
    pub fn new(kind: SeriesKind, g_lo: u32, g_hi: u32) -> Result<Self> {
        if g_lo > g_hi {
            return Err(Error::invalid(format!("empty genus range {g_lo}..{g_hi}")));
        }
        let min = kind.min_genus();
        if g_lo < min {
            return Err(Error::invalid(format!("{kind} is defined from g = {min}, range starts at {g_lo}")));
        }
        Ok(SeriesSpec { kind, g_lo, g_hi })
    }

    pub fn genera(&self) -> std::ops::RangeInclusive<u32> {
        self.g_lo..=self.g_hi
    }

    pub fn keys(&self) -> Vec<BracketKey> {
        self.genera().flat_map(|g| self.kind.keys(g)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub g: u32,
    pub value: Float,
}

/// Evaluates the series over its range. Brackets are computed up front in
/// parallel; the terms come back ordered by genus.
pub fn series(source: &dyn BracketSource, spec: &SeriesSpec, prec: u32) -> Result<Vec<SeriesPoint>> {
    source.precompute(&spec.keys())?;
    spec.genera()
        .map(|g| Ok(SeriesPoint { g, value: spec.kind.term(source, g, prec)? }))
        .collect()
}

/// Parses `lo:hi` (inclusive).
pub fn parse_range(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("range `{s}` is not of the form lo:hi")))?;
    let p = |t: &str| {
        t.trim()
            .parse::<u32>()
            .map_err(|_| Error::invalid(format!("bad range endpoint `{t}`")))
    };
    Ok((p(a)?, p(b)?))
}

impl FromStr for SeriesKind {
    type Err = Error;

    /// `name`, `name:n` or `name:n:k`.
    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split(':');
        let name = it.next().unwrap_or_default();
        let num = |t: Option<&str>| -> Result<Option<u32>> {
            t.map(|t| t.parse::<u32>().map_err(|_| Error::invalid(format!("bad parameter `{t}`"))))
                .transpose()
        };
        let n = num(it.next())?.unwrap_or(0);
        let k = num(it.next())?;
        SeriesKind::from_name(name, n, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::{EngineConfig, ExactEngine};

    fn engine() -> ExactEngine {
        ExactEngine::exact(EngineConfig { workers: 1, ..Default::default() }).unwrap()
    }

    #[test]
    fn v_ratio_n_is_in_sanity_band() {
        let e = engine();
        let spec = SeriesSpec::new(SeriesKind::VRatioN { n: 0 }, 5, 10).unwrap();
        let s = series(&e, &spec, 256).unwrap();
        assert_eq!(s.len(), 6);
        for p in &s {
            assert!(p.value > 0.5 && p.value < 1.5, "g={} {}", p.g, p.value);
        }
    }

    #[test]
    fn small_terms_by_hand() {
        let e = engine();
        // V_{1,2}/V_{1,1} = (pi^4/4)/(pi^2/12) = 3 pi^2; times 1/(8 pi^2) gives 3/8.
        let x = SeriesKind::VRatioN { n: 1 }.term(&e, 1, 128).unwrap();
        assert!((x - 0.375f64).abs() < 1e-30);
        // [tau_1]_{1,1}/V_{1,1} = (1/2)/(pi^2/12) = 6/pi^2.
        let t = SeriesKind::TauRatio { n: 1, k: 1 }.term(&e, 1, 128).unwrap();
        let pi2 = crate::arith::pi_pow2(1, 128);
        assert!((t - Float::with_val(128, 6 / &pi2)).abs() < 1e-30);
    }

    #[test]
    fn min_genus_respects_stability() {
        assert_eq!(SeriesKind::VRatioN { n: 0 }.min_genus(), 2);
        assert_eq!(SeriesKind::VRatioG { n: 0 }.min_genus(), 2);
        assert_eq!(SeriesKind::VRatioG { n: 1 }.min_genus(), 1);
        assert_eq!(SeriesKind::TauRatio { n: 2, k: 3 }.min_genus(), 2);
        assert!(SeriesSpec::new(SeriesKind::NormVolume { n: 0 }, 1, 5).is_err());
        assert!(SeriesSpec::new(SeriesKind::NormVolume { n: 0 }, 6, 5).is_err());
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("tau-ratio:2:1".parse::<SeriesKind>().unwrap(), SeriesKind::TauRatio { n: 2, k: 1 });
        assert_eq!("v_ratio_g:1".parse::<SeriesKind>().unwrap(), SeriesKind::VRatioG { n: 1 });
        assert!("tau-ratio:2".parse::<SeriesKind>().is_err());
        assert!("v-ratio-n:1:1".parse::<SeriesKind>().is_err());
        assert!("nope".parse::<SeriesKind>().is_err());
        assert_eq!(parse_range("8:16").unwrap(), (8, 16));
    }

    #[test]
    fn capability_is_an_error() {
        let e = ExactEngine::exact(EngineConfig { workers: 1, max_level: Some(6), ..Default::default() }).unwrap();
        let spec = SeriesSpec::new(SeriesKind::VRatioN { n: 0 }, 2, 12).unwrap();
        assert!(matches!(series(&e, &spec, 128), Err(Error::Capability { .. })));
    }
}
