use std::fmt;
use std::str::FromStr;

use rug::Float;
use serde::{Serialize, Serializer};

use super::series::SeriesPoint;
use crate::arith::format_float;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Exact polynomial interpolation in 1/g through the largest-g points.
    #[default]
    Richardson,
    /// Least squares over the whole window.
    LeastSquares,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::Richardson => "richardson",
            FitMethod::LeastSquares => "least-squares",
        })
    }
}

impl FromStr for FitMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(FitMethod::Richardson),
            "least-squares" | "lsq" => Ok(FitMethod::LeastSquares),
            _ => Err(Error::invalid(format!("unknown fit method `{s}`"))),
        }
    }
}

/// Digits used when a fit is serialized.
const REPORT_DIGITS: usize = 30;

fn ser_floats<S: Serializer>(v: &[Float], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| format_float(x, REPORT_DIGITS)))
}

fn ser_float<S: Serializer>(x: &Float, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_float(x, REPORT_DIGITS))
}

/// Coefficients `u_0..u_k` of `f(g) ~ u_0 + u_1/g + ... + u_k/g^k`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionFit {
    pub order: usize,
    pub method: FitMethod,
    pub window: (u32, u32),
    pub precision: u32,
    #[serde(serialize_with = "ser_floats")]
    pub coefficients: Vec<Float>,
    /// Per coefficient: distance between the two methods plus the spread
    /// over windows shortened by one point at either end.
    #[serde(serialize_with = "ser_floats")]
    pub uncertainty: Vec<Float>,
    /// Coefficients of the other method, for reference.
    #[serde(serialize_with = "ser_floats")]
    pub cross_check: Vec<Float>,
    /// Root-mean-square misfit of the reported polynomial over the window.
    #[serde(serialize_with = "ser_float")]
    pub residual_norm: Float,
    /// log2 of the 1-norm condition number of the least-squares system.
    pub condition_log2: f64,
    pub ill_conditioned: bool,
}

impl ExpansionFit {
    pub fn u(&self, j: usize) -> &Float {
        &self.coefficients[j]
    }

    pub fn u_f64(&self, j: usize) -> f64 {
        self.coefficients[j].to_f64()
    }

    pub fn uncertainty_f64(&self, j: usize) -> f64 {
        self.uncertainty[j].to_f64()
    }
}

/// Fits an expansion of the given order in 1/g to the points, which must be
/// ordered by increasing genus.
pub fn fit_expansion(points: &[SeriesPoint], order: usize, method: FitMethod) -> Result<ExpansionFit> {
    let k = order;
    if points.len() < k + 2 {
        return Err(Error::NotEnoughPoints { needed: k + 2, got: points.len() });
    }
    if points.windows(2).any(|w| w[0].g >= w[1].g) {
        return Err(Error::invalid("fit points must have strictly increasing genus"));
    }
    if points.iter().any(|p| !p.value.is_finite()) {
        return Err(Error::invalid("fit points must be finite"));
    }
    let prec = points.iter().map(|p| p.value.prec()).max().unwrap_or(128);
    let work = 2 * prec + 64;

    let rich = richardson(points, k, work);
    let (lsq, cond_log2) = least_squares(points, k, work)?;

    // Window variants: drop the last point, or the first one.
    let n = points.len();
    let mut variants = vec![richardson(&points[..n - 1], k, work)];
    if n >= k + 3 {
        variants.push(least_squares(&points[1..], k, work)?.0);
        variants.push(least_squares(&points[..n - 1], k, work)?.0);
    }

    let (reported, other) = match method {
        FitMethod::Richardson => (&rich, &lsq),
        FitMethod::LeastSquares => (&lsq, &rich),
    };
    let uncertainty = (0..=k)
        .map(|j| {
            let mut u = Float::with_val(work, &rich[j] - &lsq[j]).abs();
            let mut spread = Float::new(work);
            for v in &variants {
                let d = Float::with_val(work, &v[j] - &reported[j]).abs();
                if d > spread {
                    spread = d;
                }
            }
            u += spread;
            Float::with_val(prec, u)
        })
        .collect();

    let mut rss = Float::new(work);
    for p in points {
        let r = Float::with_val(work, &p.value - eval(reported, p.g, work));
        rss += r.square();
    }
    rss /= n as u32;
    let residual_norm = Float::with_val(prec, rss.sqrt());

    let round = |v: &[Float]| v.iter().map(|x| Float::with_val(prec, x)).collect::<Vec<_>>();
    Ok(ExpansionFit {
        order: k,
        method,
        window: (points[0].g, points[n - 1].g),
        precision: prec,
        coefficients: round(reported),
        uncertainty,
        cross_check: round(other),
        residual_norm,
        condition_log2: cond_log2,
        ill_conditioned: cond_log2 > f64::from(prec) / 2.0,
    })
}

fn eval(c: &[Float], g: u32, prec: u32) -> Float {
    let x = Float::with_val(prec, 1) / g;
    let mut acc = Float::new(prec);
    for cj in c.iter().rev() {
        acc *= &x;
        acc += cj;
    }
    acc
}

/// Interpolates the last `k + 1` points in x = 1/g by Newton divided
/// differences and expands to monomial coefficients.
fn richardson(points: &[SeriesPoint], k: usize, prec: u32) -> Vec<Float> {
    let pts = &points[points.len() - k - 1..];
    let xs: Vec<Float> = pts.iter().map(|p| Float::with_val(prec, 1) / p.g).collect();
    let mut dd: Vec<Float> = pts.iter().map(|p| Float::with_val(prec, &p.value)).collect();
    for level in 1..=k {
        for i in (level..=k).rev() {
            let num = Float::with_val(prec, &dd[i] - &dd[i - 1]);
            let den = Float::with_val(prec, &xs[i] - &xs[i - level]);
            dd[i] = num / den;
        }
    }
    // Horner on the Newton form: p(x) = dd0 + (x - x0)(dd1 + (x - x1)(...)).
    let mut c = vec![Float::new(prec); k + 1];
    c[0] = dd[k].clone();
    for i in (0..k).rev() {
        // c <- c * (x - xs[i]) + dd[i]
        let mut next = vec![Float::new(prec); k + 1];
        for j in 0..=k {
            if j < k {
                next[j + 1] += &c[j];
            }
            next[j] -= Float::with_val(prec, &c[j] * &xs[i]);
        }
        next[0] += &dd[i];
        c = next;
    }
    c
}

/// Least-squares polynomial of degree `k` in 1/g, via normal equations at
/// raised precision. Also returns log2 of the condition number.
fn least_squares(points: &[SeriesPoint], k: usize, prec: u32) -> Result<(Vec<Float>, f64)> {
    let m = k + 1;
    let mut a = vec![vec![Float::new(prec); m]; m];
    let mut b = vec![Float::new(prec); m];
    for p in points {
        let x = Float::with_val(prec, 1) / p.g;
        let mut pw = Vec::with_capacity(2 * m);
        let mut t = Float::with_val(prec, 1);
        for _ in 0..2 * m {
            pw.push(t.clone());
            t *= &x;
        }
        for i in 0..m {
            for j in 0..m {
                a[i][j] += &pw[i + j];
            }
            b[i] += Float::with_val(prec, &pw[i] * &p.value);
        }
    }
    let inv = invert(&a, prec).ok_or_else(|| Error::invalid("singular least-squares system"))?;
    let sol = (0..m)
        .map(|i| {
            let mut s = Float::new(prec);
            for j in 0..m {
                s += Float::with_val(prec, &inv[i][j] * &b[j]);
            }
            s
        })
        .collect();
    let cond = Float::with_val(prec, norm1(&a, prec) * norm1(&inv, prec));
    Ok((sol, cond.log2().to_f64()))
}

fn norm1(a: &[Vec<Float>], prec: u32) -> Float {
    let m = a.len();
    let mut best = Float::new(prec);
    for j in 0..m {
        let mut s = Float::new(prec);
        for row in a {
            s += Float::with_val(prec, row[j].abs_ref());
        }
        if s > best {
            best = s;
        }
    }
    best
}

/// Gauss-Jordan with partial pivoting.
fn invert(a: &[Vec<Float>], prec: u32) -> Option<Vec<Vec<Float>>> {
    let m = a.len();
    let mut w: Vec<Vec<Float>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|j| Float::with_val(prec, u32::from(i == j))));
            r
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| {
            w[x][col].clone().abs().partial_cmp(&w[y][col].clone().abs()).expect("finite")
        })?;
        if w[piv][col].is_zero() {
            return None;
        }
        w.swap(col, piv);
        let p = w[col][col].clone();
        for v in w[col].iter_mut() {
            *v /= &p;
        }
        for r in 0..m {
            if r != col && !w[r][col].is_zero() {
                let f = w[r][col].clone();
                for c in 0..2 * m {
                    let t = Float::with_val(prec, &f * &w[col][c]);
                    w[r][c] -= t;
                }
            }
        }
    }
    Some(w.into_iter().map(|r| r[m..].to_vec()).collect())
}
