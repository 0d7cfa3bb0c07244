use std::sync::OnceLock;

use proptest::prelude::*;
use rug::{Float, Rational};

use wpvol_core::asymptotics::{
    chain_violations, fit_expansion, monotonicity_scan, predicted, sandwich_violations, series,
    subsurface_residual, variable_n_check, FitMethod, MonotoneKind, Params, SandwichLower, Schedule,
    SeriesKind, SeriesPoint, SeriesSpec, Side,
};
use wpvol_core::bracket::{Engine, EngineConfig, ExactEngine};

fn exact() -> &'static ExactEngine {
    static E: OnceLock<ExactEngine> = OnceLock::new();
    E.get_or_init(|| Engine::exact(EngineConfig { workers: 2, ..EngineConfig::default() }).unwrap())
}

#[test]
fn chain_holds_on_the_table() {
    assert!(chain_violations(exact(), 7, 5).unwrap().is_empty());
}

#[test]
fn sandwich_upper_bound_always_holds_and_lower_needs_n_minus_one() {
    let e = exact();
    let stated = sandwich_violations(e, 2, 7, 5, 5, SandwichLower::Stated).unwrap();
    assert!(stated.iter().all(|v| v.side == Side::Lower));
    let at: Vec<_> = stated.iter().map(|v| (v.g, v.n, v.k)).collect();
    assert_eq!(at, vec![(2, 3, 1), (2, 4, 1), (2, 5, 1), (3, 5, 1)]);
    assert!(sandwich_violations(e, 2, 7, 5, 5, SandwichLower::OneFewer).unwrap().is_empty());
}

#[test]
fn subsurface_products_telescope_exactly() {
    let tuples = [
        (2, 1, 2, 1),
        (3, 1, 3, 0),
        (3, 2, 4, 2),
        (4, 1, 2, 2),
        (4, 2, 1, 0),
        (4, 1, 3, 1),
        (5, 1, 1, 1),
        (5, 2, 3, 3),
        (3, 0, 5, 3),
        (2, 2, 4, 1),
    ];
    for (g, gp, n, np) in tuples {
        let r = subsurface_residual(exact(), g, gp, n, np).unwrap_or_else(|e| panic!("({g}, {gp}, {n}, {np}): {e}"));
        assert!(r.is_zero(), "({g}, {gp}, {n}, {np}) leaves {r}");
    }
    assert!(subsurface_residual(exact(), 2, 2, 1, 1).is_err());
    assert!(subsurface_residual(exact(), 4, 3, 3, 1).is_err());
}

#[test]
fn doubling_precision_moves_values_by_less_than_half_the_bits() {
    for kind in [
        SeriesKind::TauRatio { n: 2, k: 1 },
        SeriesKind::VRatioG { n: 1 },
        SeriesKind::NormVolume { n: 0 },
        SeriesKind::EulerRatio { n: 1 },
    ] {
        let spec = SeriesSpec::new(kind, 3, 8).unwrap();
        for prec in [128u32, 200] {
            let lo = series(exact(), &spec, prec).unwrap();
            let hi = series(exact(), &spec, 2 * prec).unwrap();
            let bound = Float::with_val(2 * prec, 1u32) >> (prec / 2);
            for (a, b) in lo.iter().zip(&hi) {
                let d = Float::with_val(2 * prec, &a.value - &b.value).abs();
                assert!(d < bound, "{kind} at g = {}", a.g);
            }
        }
    }
}

#[test]
fn tau_ratio_tends_to_one() {
    let spec = SeriesSpec::new(SeriesKind::TauRatio { n: 2, k: 1 }, 5, 11).unwrap();
    let pts = series(exact(), &spec, 256).unwrap();
    let fit = fit_expansion(&pts, 4, FitMethod::Richardson).unwrap();
    assert!((fit.u_f64(0) - 1.0).abs() < 1e-6, "u0 = {}", fit.u_f64(0));
}

#[test]
fn degenerate_schedule_is_the_normalized_volume() {
    let spec = SeriesSpec::new(SeriesKind::NormVolume { n: 1 }, 2, 7).unwrap();
    let plain = series(exact(), &spec, 192).unwrap();
    let var = variable_n_check(exact(), Schedule::Constant(1), 2, 7, 192).unwrap();
    for (p, v) in plain.iter().zip(&var) {
        assert_eq!((p.g, &p.value), (v.g, &v.value));
    }
    // n = g is outside any convergence statement but still well defined.
    let lin = variable_n_check(exact(), Schedule::Linear, 1, 5, 192).unwrap();
    assert!(lin.iter().all(|p| p.value.is_finite() && p.value > 0));
}

#[test]
fn monotonicity_scan_preconditions() {
    let e = exact();
    assert!(monotonicity_scan(e, MonotoneKind::GenusInverse, 2, 5, 5, 128).is_err());
    assert!(monotonicity_scan(e, MonotoneKind::GenusInverse, 1, 3, 6, 128).is_err());
    assert!(monotonicity_scan(e, MonotoneKind::PointInverse, 2, 3, 6, 128).is_err());
    assert!(monotonicity_scan(e, MonotoneKind::PointInverse, 3, 3, 7, 128).is_ok());
}

fn points(coeffs: &[Rational], g_lo: u32, g_hi: u32, prec: u32) -> Vec<SeriesPoint> {
    (g_lo..=g_hi)
        .map(|g| {
            let x = Rational::from((1, g));
            let mut v = Rational::new();
            let mut p = Rational::from(1);
            for c in coeffs {
                v += Rational::from(c * &p);
                p *= &x;
            }
            SeriesPoint { g, value: Float::with_val(prec, &v) }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn r2_complements_c1(n in 0i64..200) {
        let c1 = predicted("c1", Params { n, k: 0 }).unwrap().value;
        let r2 = predicted("r2", Params { n, k: 0 }).unwrap().value;
        let sum = c1.add(&r2);
        prop_assert_eq!(sum.coeff(0), Rational::from((3, 8)));
        prop_assert_eq!(sum.terms().count(), 1);
    }

    /// A sequence that is exactly a polynomial in 1/g of the fitted order is
    /// recovered by both methods, and refitting the reconstruction is stable.
    #[test]
    fn polynomial_sequences_refit_exactly(
        c in prop::collection::vec(-50i64..50, 4),
        g_lo in 3u32..8,
        len in 7u32..10,
        method in prop_oneof![Just(FitMethod::Richardson), Just(FitMethod::LeastSquares)],
    ) {
        let prec = 256;
        let coeffs: Vec<Rational> = c.iter().map(|&x| Rational::from((x, 7))).collect();
        let pts = points(&coeffs, g_lo, g_lo + len, prec);
        let fit = fit_expansion(&pts, 3, method).unwrap();
        for (j, q) in coeffs.iter().enumerate() {
            let d = (fit.u(j).clone() - Float::with_val(prec, q)).abs();
            prop_assert!(d < 1e-40, "u{} off by {}", j, d);
        }
        let again: Vec<SeriesPoint> = pts
            .iter()
            .map(|p| {
                let x = Float::with_val(prec, p.g).recip();
                let mut v = Float::new(prec);
                let mut pw = Float::with_val(prec, 1u32);
                for u in &fit.coefficients {
                    v += Float::with_val(prec, u * &pw);
                    pw *= &x;
                }
                SeriesPoint { g: p.g, value: v }
            })
            .collect();
        let refit = fit_expansion(&again, 3, method).unwrap();
        for j in 0..4 {
            let d = (refit.u(j).clone() - fit.u(j)).abs();
            prop_assert!(d < 1e-40);
        }
    }
}
