//! Closed-form expansion coefficients, evaluated exactly at integer
//! parameters.

use rug::Rational;
use serde::Serialize;

use super::series::SeriesKind;
use crate::arith::PiPolynomial;
use crate::error::{Error, Result};

/// Registered coefficient names.
pub const PREDICTED_NAMES: &[&str] = &[
    "c1",
    "r2",
    "e1",
    "a1",
    "a1-inverse",
    "b1",
    "eqn",
    "tau-step",
    "tau0tauk-1",
    "tau0tauk-2",
    "tau0tauk-2-poly",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Params {
    pub n: i64,
    pub k: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedCoefficient {
    pub name: String,
    pub params: Params,
    #[serde(serialize_with = "ser_poly")]
    pub value: PiPolynomial,
}

fn ser_poly<S: serde::Serializer>(p: &PiPolynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

/// `sum_i c_i pi^{2 g_i}`
fn poly(terms: &[(i32, Rational)]) -> PiPolynomial {
    PiPolynomial::from_terms(terms.iter().cloned())
}

fn need_n(name: &str, p: Params, min: i64) -> Result<i64> {
    if p.n < min {
        return Err(Error::invalid(format!("`{name}` needs n >= {min}, got {}", p.n)));
    }
    Ok(p.n)
}

/// The closed form registered under `name`.
pub fn predicted(name: &str, params: Params) -> Result<PredictedCoefficient> {
    let Params { n, k } = params;
    let value = match name {
        // 1/g coefficient of V_{g,n} sqrt(g) / ((2g-3+n)! (4pi^2)^{2g-3+n}) / C.
        "c1" => {
            need_n(name, params, 0)?;
            poly(&[(-1, q(-n * n, 2) + q(5 * n, 2) - q(17, 6)), (0, q(-n, 4) + q(7, 12))])
        }
        // 1/g^2 coefficient of the genus step ratio.
        "r2" => {
            need_n(name, params, 0)?;
            poly(&[(-1, q(n * n, 2) - q(5 * n, 2) + q(17, 6)), (0, q(n, 4) - q(5, 24))])
        }
        // 1/g coefficient of [tau_k tau_0^{n-1}]_{g,n} / V_{g,n}.
        "e1" => {
            need_n(name, params, 1)?;
            let num = Rational::from(k * k) + (Rational::from(n) - q(5, 2)) * k - q(n, 2) + q(3, 2);
            poly(&[(-1, -num)])
        }
        // V_{g,n+1} / (8 pi^2 g V_{g,n})
        "a1" => {
            need_n(name, params, 0)?;
            poly(&[(-1, Rational::from(2 - n)), (0, q(n, 2) - q(5, 4))])
        }
        // 8 pi^2 g V_{g,n} / V_{g,n+1}: the first-order coefficient of an
        // inverse is the negated coefficient.
        "a1-inverse" => predicted("a1", params)?.value.neg(),
        // V_{g-1,n+2} / V_{g,n}
        "b1" => {
            need_n(name, params, 0)?;
            poly(&[(-1, Rational::from(3 - 2 * n))])
        }
        // 4 pi^2 (2g-2+n) V_{g,n} / V_{g,n+1}
        "eqn" => {
            need_n(name, params, 0)?;
            poly(&[(-1, Rational::from(n - 2)), (0, q(1, 4))])
        }
        // [tau_{k+1} tau_0^{n-1}] / [tau_k tau_0^{n-1}]
        "tau-step" => {
            need_n(name, params, 1)?;
            poly(&[(-1, -(Rational::from(2 * k + n) - q(3, 2)))])
        }
        "tau0tauk-1" => poly(&[(-1, -q(2 * k * k - k + 1, 2))]),
        "tau0tauk-2-poly" => tau0tauk_second_poly(k),
        // Boundary corrections at k = 1, 2; the polynomial from k = 3 on.
        "tau0tauk-2" => {
            let p = tau0tauk_second_poly(k);
            match k {
                1 => p.sub(&poly(&[(-1, q(1, 8)), (-2, q(5, 8))])),
                2 => p.sub(&poly(&[(-2, q(5, 8))])),
                _ => p,
            }
        }
        _ => return Err(Error::UnknownCoefficient(name.to_string())),
    };
    Ok(PredictedCoefficient { name: name.to_string(), params, value })
}

/// Degree-4 polynomial in k for the 1/g^2 term of [tau_0 tau_k]_{g,2}/V_{g,2}.
fn tau0tauk_second_poly(k: i64) -> PiPolynomial {
    let k = Rational::from(k);
    let k2 = Rational::from(&k * &k);
    let k3 = Rational::from(&k2 * &k);
    let k4 = Rational::from(&k2 * &k2);
    let m4 = k4 / 2u32 - k3 * q(13, 6) + (&k2 * q(27, 8)) - (&k * q(59, 24)) + q(19, 8);
    let m2 = Rational::from(&k / 24u32) - k2 / 2u32 - q(1, 4);
    poly(&[(-2, m4), (-1, m2), (0, q(1, 64))])
}

/// The predicted first-order coefficient for a series, if one is known.
pub fn first_order_for(kind: &SeriesKind) -> Option<PredictedCoefficient> {
    let (name, params) = match *kind {
        SeriesKind::VRatioN { n } => ("a1", Params { n: n.into(), k: 0 }),
        SeriesKind::VRatioNInverse { n } => ("a1-inverse", Params { n: n.into(), k: 0 }),
        SeriesKind::VRatioG { n } => ("b1", Params { n: n.into(), k: 0 }),
        SeriesKind::EulerRatio { n } => ("eqn", Params { n: n.into(), k: 0 }),
        SeriesKind::TauRatio { n, k } => ("e1", Params { n: n.into(), k: k.into() }),
        SeriesKind::TauStep { n, k } => ("tau-step", Params { n: n.into(), k: k.into() }),
        SeriesKind::NormVolume { n } => ("c1", Params { n: n.into(), k: 0 }),
        SeriesKind::GenusStep { .. } => return None,
    };
    predicted(name, params).ok()
}

/// The predicted second-order coefficient for a series, if one is known.
pub fn second_order_for(kind: &SeriesKind) -> Option<PredictedCoefficient> {
    match *kind {
        SeriesKind::TauRatio { n: 2, k } => predicted("tau0tauk-2", Params { n: 2, k: k.into() }).ok(),
        SeriesKind::GenusStep { n } => predicted("r2", Params { n: n.into(), k: 0 }).ok(),
        _ => None,
    }
}
