use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Float, Rational};

use wpvol_core::arith::{bernoulli, pi_pow2, zeta_even};
use wpvol_core::{PiPolynomial, PiValue};

fn rational() -> impl Strategy<Value = Rational> {
    (-500i64..500, 1i64..200).prop_map(|(n, d)| Rational::from((n, d)))
}

fn value() -> impl Strategy<Value = PiValue> {
    (rational(), -4i32..6).prop_map(|(q, k)| PiValue::new(q, k))
}

fn poly() -> impl Strategy<Value = PiPolynomial> {
    prop::collection::vec((-3i32..4, rational()), 0..4).prop_map(PiPolynomial::from_terms)
}

proptest! {
    #[test]
    fn same_grade_addition_is_a_group(a in rational(), b in rational(), c in rational(), k in -3i32..5) {
        let (x, y, z) = (PiValue::new(a, k), PiValue::new(b, k), PiValue::new(c, k));
        prop_assert_eq!(x.checked_add(&y).unwrap(), y.checked_add(&x).unwrap());
        let l = x.checked_add(&y).unwrap().checked_add(&z).unwrap();
        let r = x.checked_add(&y.checked_add(&z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        prop_assert!(x.checked_sub(&x).unwrap().is_zero());
    }

    #[test]
    fn grades_add_under_multiplication(x in value(), y in value()) {
        let p = x.mul(&y);
        if !p.is_zero() {
            prop_assert_eq!(p.grade(), x.grade() + y.grade());
        }
        prop_assert_eq!(p.rational().clone(), Rational::from(x.rational() * y.rational()));
    }

    #[test]
    fn mixed_grades_never_add(x in value(), y in value()) {
        let r = x.checked_add(&y);
        if !x.is_zero() && !y.is_zero() && x.grade() != y.grade() {
            prop_assert!(r.is_err());
        } else {
            prop_assert!(r.is_ok());
        }
    }

    #[test]
    fn division_inverts_multiplication(x in value(), y in value()) {
        prop_assume!(!y.is_zero());
        prop_assert_eq!(x.mul(&y).checked_div(&y).unwrap(), x);
    }

    #[test]
    fn text_form_round_trips(x in value()) {
        let s = x.to_string();
        prop_assert_eq!(s.parse::<PiValue>().unwrap(), x);
    }

    #[test]
    fn laurent_polynomials_form_a_ring(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
        prop_assert!(a.terms().all(|(_, q)| *q != 0));
    }

    #[test]
    fn float_image_is_a_homomorphism(x in value(), y in value()) {
        let prec = 256;
        let lhs = x.mul(&y).to_float(prec);
        let rhs = Float::with_val(prec, x.to_float(prec) * y.to_float(prec));
        let scale = Float::with_val(prec, rhs.abs_ref()).max(&Float::with_val(prec, 1e-300));
        let rel = Float::with_val(prec, &lhs - &rhs).abs() / scale;
        prop_assert!(rel < 1e-70);
    }
}

#[test]
fn bernoulli_signs_alternate_to_high_order() {
    for k in 1..=40u32 {
        let b = bernoulli(2 * k).unwrap();
        let expected = if k % 2 == 1 { 1 } else { -1 };
        assert_eq!(b.cmp0() as i32, expected, "sign of B_{}", 2 * k);
    }
    assert!(bernoulli(7).is_err());
}

#[test]
fn even_zeta_matches_partial_sums() {
    const TERMS: u32 = 1_000_000;
    let prec = 160;
    let mut sums: Vec<Float> = (0..20).map(|_| Float::new(prec)).collect();
    for i in 1..=TERMS {
        let inv_sq = Float::with_val(prec, Float::with_val(prec, i).square()).recip();
        let mut p = inv_sq.clone();
        for s in sums.iter_mut() {
            *s += &p;
            p *= &inv_sq;
        }
    }
    for (idx, partial) in sums.iter().enumerate() {
        let l = idx as u32 + 1;
        let exact = zeta_even(l).to_float(prec);
        let diff = Float::with_val(prec, &exact - partial).abs();
        let tol = Float::with_val(prec, 10u32).pow(-6 * l.min(4) as i32);
        assert!(diff < tol, "zeta({}) - partial = {diff}", 2 * l);
        if l <= 3 {
            // The tail is still above the working precision here.
            assert!(exact > *partial, "partial sums approach from below");
        }
    }
    // zeta(2) = pi^2 / 6, as a separately computed float.
    let z2 = Float::with_val(prec, pi_pow2(1, prec) / 6u32);
    let d = Float::with_val(prec, zeta_even(1).to_float(prec) - z2).abs();
    assert!(d < 1e-45);
}
