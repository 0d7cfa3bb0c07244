use rug::{Float, Rational};

use super::{a_coeff, a_diff_float};
use crate::arith::{factorial, PiPolynomial};

/// Coefficients of one order j of
///   (t D t^{-1})^j sinh t = sum_l t^l (a1[l] cosh t + b1[l] sinh t),
///   D^j cosh t            = sum_l t^l (a2[l] cosh t + b2[l] sinh t),
/// with D = (t/2) d/dt. Each vector has length j + 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DRow {
    pub a1: Vec<Rational>,
    pub b1: Vec<Rational>,
    pub a2: Vec<Rational>,
    pub b2: Vec<Rational>,
}

impl DRow {
    fn order_zero() -> Self {
        DRow {
            a1: vec![Rational::new()],
            b1: vec![Rational::from(1)],
            a2: vec![Rational::from(1)],
            b2: vec![Rational::new()],
        }
    }

    pub fn order(&self) -> usize {
        self.a1.len() - 1
    }

    /// Combined cosh and sinh coefficients a1 + a2, b1 + b2.
    pub fn combined(&self) -> (Vec<Rational>, Vec<Rational>) {
        let a = self
            .a1
            .iter()
            .zip(&self.a2)
            .map(|(x, y)| Rational::from(x + y))
            .collect();
        let b = self
            .b1
            .iter()
            .zip(&self.b2)
            .map(|(x, y)| Rational::from(x + y))
            .collect();
        (a, b)
    }

    /// Coefficient of the odd zeta value zeta(2k+1) in the moment, up to the
    /// factor (2k)!; it must vanish for the moment to be a polynomial in pi^2.
    pub fn cancellation_residual(&self, k: usize) -> Rational {
        let (a, b) = self.combined();
        let at = |v: &[Rational], i: usize| v.get(i).cloned().unwrap_or_default();
        let mut r = at(&a, 2 * k + 1) * Rational::from(2 * k as u32 + 1);
        r -= at(&a, 2 * k);
        r += at(&b, 2 * k);
        r
    }
}

// D acting on sum_l t^l (A[l] cosh + B[l] sinh), followed by `- shift`.
fn apply_d(a: &[Rational], b: &[Rational], shift: &Rational) -> (Vec<Rational>, Vec<Rational>) {
    let n = a.len() + 1;
    let mut na = vec![Rational::new(); n];
    let mut nb = vec![Rational::new(); n];
    for l in 0..a.len() {
        let half_l = Rational::from((l as u32, 2u32));
        // (t/2) d/dt t^l cosh = (l/2) t^l cosh + (1/2) t^{l+1} sinh
        na[l] += Rational::from(&a[l] * &half_l);
        nb[l + 1] += Rational::from(&a[l] / 2u32);
        nb[l] += Rational::from(&b[l] * &half_l);
        na[l + 1] += Rational::from(&b[l] / 2u32);
        na[l] -= Rational::from(&a[l] * shift);
        nb[l] -= Rational::from(&b[l] * shift);
    }
    (na, nb)
}

/// Rows of the D-operator decomposition, built by applying t D t^{-1}
/// (= D - 1/2) to the sinh rows and D to the cosh rows one order at a time.
#[derive(Clone, Debug)]
pub struct DOperatorTable {
    rows: Vec<DRow>,
}

impl DOperatorTable {
    pub fn new(max_order: usize) -> Self {
        let mut rows = vec![DRow::order_zero()];
        let half = Rational::from((1, 2));
        let none = Rational::new();
        while rows.len() <= max_order {
            let prev = rows.last().expect("non-empty");
            let (a1, b1) = apply_d(&prev.a1, &prev.b1, &half);
            let (a2, b2) = apply_d(&prev.a2, &prev.b2, &none);
            rows.push(DRow { a1, b1, a2, b2 });
        }
        DOperatorTable { rows }
    }

    pub fn row(&self, j: usize) -> &DRow {
        &self.rows[j]
    }

    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }
}

/// sum_{i>=0} i^j (a_{i+1} - a_i) exactly, with 0^0 = 1.
///
/// Uses the integrals
///   int t^l e^t  / (1+e^t)^2 = l! eta(l),
///   int t^l e^-t / (1+e^t)^2 = l! (1 - 2 eta(l+1) + eta(l)),
/// where eta(s) = (1 - 2^{1-s}) zeta(s), so eta(2k) = a_k. The odd eta
/// values cancel; this is asserted rather than assumed.
pub fn moment_exact(j: u32) -> PiPolynomial {
    let table = DOperatorTable::new(j as usize);
    let row = table.row(j as usize);
    let (a, b) = row.combined();
    for k in 0..=(j as usize) / 2 {
        assert!(
            row.cancellation_residual(k) == 0,
            "odd zeta value survives at order {j}, k = {k}"
        );
    }
    let mut out = PiPolynomial::zero();
    for l in 0..a.len() {
        let fact = Rational::from(factorial(l as u32));
        let diff = Rational::from(&a[l] - &b[l]);
        // Rational part: l! (a - b) / 2
        out.add_term(0, &(Rational::from(&diff * &fact) / 2u32));
        // l! a_l eta(l), even l only
        if l % 2 == 0 {
            let w = Rational::from(&a[l] * &fact);
            out = out.add(&PiPolynomial::from(a_coeff(l as u32 / 2)).scale(&w));
        } else {
            // l! (b_l - a_l) eta(l+1), l + 1 even
            let w = Rational::from(-&diff) * &fact;
            out = out.add(&PiPolynomial::from(a_coeff((l as u32).div_ceil(2))).scale(&w));
        }
    }
    out
}

/// sum_{i=0}^{n} i^j (a_{i+1} - a_i) at `prec` bits.
pub fn moment_partial(j: u32, n: u32, prec: u32) -> Float {
    let mut acc = Float::new(prec + 32);
    for i in 0..=n {
        let w = if j == 0 {
            Float::with_val(prec + 32, 1)
        } else {
            Float::with_val(prec + 32, Float::u_pow_u(i, j))
        };
        acc += w * a_diff_float(i, prec + 32);
    }
    Float::with_val(prec, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn low_moments_are_exact() {
        assert_eq!(
            moment_exact(0),
            PiPolynomial::constant(Rational::from((1, 2)))
        );
        assert_eq!(
            moment_exact(1),
            PiPolynomial::constant(Rational::from((1, 4)))
        );
    }

    #[test]
    fn cancellation_holds() {
        let t = DOperatorTable::new(12);
        for j in 0..=12 {
            for k in 0..=7 {
                assert_eq!(t.row(j).cancellation_residual(k), 0, "j={j} k={k}");
            }
        }
    }

    // Direct expansion of (t D t^{-1})^j sinh t on the series side: the
    // coefficient of t^{2i+1}/(2i+1)! must be i^j.
    #[test]
    fn rows_reproduce_series() {
        let t = DOperatorTable::new(6);
        let prec = 256;
        for j in 0..=6 {
            let row = t.row(j);
            for x in [0.3f64, 1.1, 2.0] {
                let x = Float::with_val(prec, x);
                let (c, s) = (
                    Float::with_val(prec, x.cosh_ref()),
                    Float::with_val(prec, x.sinh_ref()),
                );
                let mut lhs1 = Float::new(prec);
                let mut lhs2 = Float::new(prec);
                for l in 0..=j {
                    let tl = Float::with_val(prec, Pow::pow(&x, l as u32));
                    lhs1 += Float::with_val(prec, &tl * &c) * &row.a1[l]
                        + Float::with_val(prec, &tl * &s) * &row.b1[l];
                    lhs2 += Float::with_val(prec, &tl * &c) * &row.a2[l]
                        + Float::with_val(prec, &tl * &s) * &row.b2[l];
                }
                let mut rhs1 = Float::new(prec);
                let mut rhs2 = Float::new(prec);
                for i in 0..80u32 {
                    let ij = if j == 0 {
                        Float::with_val(prec, 1)
                    } else {
                        Float::with_val(prec, Float::u_pow_u(i, j as u32))
                    };
                    let odd = Float::with_val(prec, Pow::pow(&x, 2 * i + 1))
                        / Float::with_val(prec, Float::factorial(2 * i + 1));
                    let even = Float::with_val(prec, Pow::pow(&x, 2 * i))
                        / Float::with_val(prec, Float::factorial(2 * i));
                    rhs1 += Float::with_val(prec, &ij * &odd);
                    rhs2 += ij * even;
                }
                let eps = Float::with_val(prec, 1e-50);
                assert!(
                    Float::with_val(prec, &lhs1 - &rhs1).abs() < eps,
                    "sinh row {j}"
                );
                assert!(
                    Float::with_val(prec, &lhs2 - &rhs2).abs() < eps,
                    "cosh row {j}"
                );
            }
        }
    }

    #[test]
    fn partial_sums_converge() {
        let half = Float::with_val(512, 0.5);
        let d = Float::with_val(512, moment_partial(0, 200, 512) - &half).abs();
        assert!(d < Float::with_val(512, 1e-30));
        let q = Float::with_val(512, 0.25);
        let d = Float::with_val(512, moment_partial(1, 200, 512) - &q).abs();
        assert!(d < Float::with_val(512, 1e-30));
        for j in 0..4 {
            assert!(moment_partial(j, 10, 256) <= moment_partial(j, 20, 256));
        }
    }
}
