//! One line per acceptance criterion.
//!
//! Runs as a plain binary so the lines are always shown. The process fails
//! on any unexpected failure. The sandwich lower bound with weight 8n is
//! known to fail; the run accepts that failure only at exactly the pairs in
//! `STATED_SANDWICH_FAILURES`, with every other property holding.

use std::process::ExitCode;
use std::time::Instant;

use rug::{Float, Rational};

use wpvol_core::arith::format_float;
use wpvol_core::aseq::{moment_exact, moment_partial};
use wpvol_core::asymptotics::{
    chain_violations, estimate_c, expansion_checks, monotonicity_scan, predicted, sandwich_violations,
    subsurface_residual, tail_deviation, variable_n_check, CoefficientCheck, MonotoneKind, MonotoneOutcome,
    Params, SandwichLower, Schedule, SeriesKind,
};
use wpvol_core::bracket::{
    calibrate, default_workers, identity_suite, BracketKey, Engine, EngineConfig, ExactEngine, FloatEngine,
    IdentityScope, SplitReading,
};
use wpvol_core::{PiPolynomial, Scalar};

const PREC: u32 = 192;
const WINDOW: (u32, u32) = (8, 16);
const SCAN_RANGE: (u32, u32) = (3, 15);
/// Regression values of the monotonicity scans.
const GENUS_INVERSE_G0: u32 = 3;
const POINT_INVERSE_G0: u32 = 3;
/// Lower-bound failures of the sandwich inequality with weight 8n, as (g, n, k).
const STATED_SANDWICH_FAILURES: [(u32, u32, u32); 4] = [(2, 3, 1), (2, 4, 1), (2, 5, 1), (3, 5, 1)];

struct Line {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
    /// Set when a failure is the recorded one.
    known: bool,
}

impl Line {
    fn new(id: &'static str, name: &'static str, pass: bool, detail: String) -> Self {
        Line { id, name, pass, detail, known: false }
    }

    fn print(&self) {
        let tag = match (self.pass, self.known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("{tag} [{}] {}: {}", self.id, self.name, self.detail);
    }
}

fn exact(workers: usize) -> ExactEngine {
    Engine::exact(EngineConfig { workers, ..EngineConfig::default() }).unwrap()
}

fn identities() -> Line {
    let t = Instant::now();
    let e = exact(1);
    let cases = identity_suite(&e, IdentityScope::FULL).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let bad: Vec<String> = cases.iter().filter(|c| !c.residual.is_zero()).map(|c| c.to_string()).collect();
    let count = |w: &str| cases.iter().filter(|c| c.which.to_string() == w).count();
    Line::new(
        "1",
        "exact identity suite",
        bad.is_empty() && secs < 300.0,
        format!(
            "{} instances ({} II, {} Ia, {} Ib), {} nonzero, {secs:.1} s on one worker",
            cases.len(),
            count("II"),
            count("Ia"),
            count("Ib"),
            bad.len()
        ),
    )
}

fn calibration() -> Line {
    let r = calibrate(IdentityScope::FULL).unwrap();
    let pass = r.closing_reading == Some(SplitReading::Ordered) && r.matches_convention && r.negative_control_nonzero > 0;
    let unordered = r.outcomes.iter().find(|o| o.reading == SplitReading::Unordered).unwrap();
    Line::new(
        "2",
        "base-case calibration",
        pass,
        format!(
            "ordered reading closes with base values (1, 1/12, 1/2): {}; unordered leaves {}/{} nonzero; \
             doubling [tau_1]_(1,1) leaves {} nonzero",
            r.matches_convention, unordered.nonzero, unordered.checked, r.negative_control_nonzero
        ),
    )
}

fn moments() -> Line {
    let prec = 512;
    let low = moment_exact(0) == PiPolynomial::constant(Rational::from((1, 2)))
        && moment_exact(1) == PiPolynomial::constant(Rational::from((1, 4)));
    let mut worst = Float::new(prec);
    let mut grades = true;
    for j in 2..=8u32 {
        let m = moment_exact(j);
        grades &= m.max_grade() == Some((j / 2) as i32);
        let d = Float::with_val(prec, m.to_float(prec) - moment_partial(j, 200, prec)).abs();
        if d > worst {
            worst = d;
        }
    }
    Line::new(
        "3",
        "moments",
        low && grades && worst < 1e-30,
        format!(
            "m0 = 1/2 and m1 = 1/4 exactly: {low}; grades floor(j/2) for j = 2..8: {grades}; \
             max |exact - partial(200)| = {}",
            format_float(&worst, 3)
        ),
    )
}

fn summarize(checks: &[&CoefficientCheck]) -> String {
    checks
        .iter()
        .map(|c| {
            format!(
                "{} {:.3}% (shift {:.2}%)",
                c.label(),
                100.0 * c.relative_error,
                100.0 * c.shift_change
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn first_order(checks: &[CoefficientCheck], secs: f64) -> Line {
    let first: Vec<_> = checks.iter().filter(|c| c.index == 1).collect();
    let pass = first.len() == 9 && first.iter().all(|c| c.pass && c.tolerance <= 0.02);
    Line::new(
        "4",
        "first-order coefficients",
        pass && secs < 900.0,
        format!("window {WINDOW:?}, order {}, {secs:.0} s: {}", first[0].order, summarize(&first)),
    )
}

fn second_order(checks: &[CoefficientCheck]) -> Line {
    let c = checks
        .iter()
        .find(|c| c.index == 2 && c.series == SeriesKind::TauRatio { n: 2, k: 1 })
        .unwrap();
    // The boundary-corrected value at k = 1 is the stated closed form.
    let p = predicted("tau0tauk-2", Params { n: 2, k: 1 }).unwrap().value;
    let stated = PiPolynomial::from_terms([
        (0, Rational::from((1, 64))),
        (-1, Rational::from((-5, 6))),
        (-2, Rational::from(1)),
    ]);
    let others: Vec<_> = checks.iter().filter(|x| x.index == 2 && !std::ptr::eq(*x, c)).collect();
    Line::new(
        "5",
        "second-order coefficient of [tau_0 tau_1]/V",
        c.pass && !c.soft && c.tolerance <= 0.10 && p == stated,
        format!(
            "fitted {:.6} vs {:.6}, {:.3}% (shift {:.2}%); also {}",
            c.fitted,
            c.predicted_value,
            100.0 * c.relative_error,
            100.0 * c.shift_change,
            summarize(&others)
        ),
    )
}

fn constant(f: &FloatEngine) -> Line {
    let target = 1.0 / std::f64::consts::PI.sqrt();
    let c0 = estimate_c(f, 0, WINDOW.0, WINDOW.1, PREC).unwrap();
    let c1 = estimate_c(f, 1, WINDOW.0, WINDOW.1, PREC).unwrap();
    let (v0, v1) = (c0.value_f64(), c1.value_f64());
    let (u0, u1) = (c0.uncertainty_f64(), c1.uncertainty_f64());
    let agree = (v0 - v1).abs() <= u0 + u1;
    let near = (v0 - target).abs() < 5e-3 && (v1 - target).abs() < 5e-3;
    let bounded = c0.increments.bounded && c1.increments.bounded;
    Line::new(
        "6",
        "universal constant",
        agree && near && bounded,
        format!(
            "C(n=0) = {v0:.9} +- {u0:.1e}, C(n=1) = {v1:.9} +- {u1:.1e}, 1/sqrt(pi) = {target:.9}; \
             max |dx| g^2 = {:.4} and {:.4}, bounded: {bounded}",
            c0.increments.max, c1.increments.max
        ),
    )
}

fn symmetry_sample(e: &ExactEngine) -> (usize, usize) {
    let mut checked = 0;
    let mut bad = 0;
    for g in 0..=4i64 {
        for n in 1..=5usize {
            let dim = 3 * g - 3 + n as i64;
            if 2 * g - 2 + n as i64 <= 0 || 2 * g + n as i64 > 10 {
                continue;
            }
            for d in wpvol_core::bracket::multisets(n, dim) {
                let d: Vec<i64> = d.iter().map(|&x| i64::from(x)).collect();
                let v = e.bracket(g, &d).unwrap();
                for idx in 0..n {
                    checked += 1;
                    if e.evaluate_with_index(g, &d, idx).unwrap() != v {
                        bad += 1;
                    }
                }
            }
        }
    }
    (checked, bad)
}

fn grading<S: Scalar>(e: &Engine<S>) -> (usize, usize) {
    let snap = e.snapshot();
    let bad = snap
        .iter()
        .filter(|(k, v)| !v.is_zero() && i64::from(v.grade()) != k.d0())
        .count();
    (snap.len(), bad)
}

fn properties(f: &FloatEngine) -> Line {
    let e = exact(default_workers());
    let (sym_n, sym_bad) = symmetry_sample(&e);
    let stated = sandwich_violations(&e, 2, 10, 5, 5, SandwichLower::Stated).unwrap();
    let fewer = sandwich_violations(&e, 2, 10, 5, 5, SandwichLower::OneFewer).unwrap();
    let chain = chain_violations(&e, 10, 5).unwrap();
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
    let sub_bad = tuples
        .iter()
        .filter(|&&(g, gp, n, np)| !subsurface_residual(&e, g, gp, n, np).unwrap().is_zero())
        .count();
    let (ge, ge_bad) = grading(&e);
    let (gf, gf_bad) = grading(f);
    let stated_at: Vec<_> = stated.iter().map(|v| (v.g, v.n, v.k)).collect();
    let others_ok = sym_bad == 0 && fewer.is_empty() && chain.is_empty() && sub_bad == 0 && ge_bad + gf_bad == 0;
    let mut line = Line::new(
        "7",
        "property suites",
        others_ok && stated.is_empty(),
        format!(
            "symmetry {sym_n} index choices, {sym_bad} unequal; grading {} stored values, {} off-grade; \
             chain over g <= 10, n <= 5: {} violations; subsurface 10 tuples, {sub_bad} nonzero; \
             sandwich over 2 <= g <= 10, 2 <= n <= 5, k <= 5: upper bound {} violations, \
             lower bound with weight 8n fails at {stated_at:?}, with weight 8(n-1) {} violations",
            ge + gf,
            ge_bad + gf_bad,
            chain.len(),
            stated.iter().chain(&fewer).filter(|v| v.side == wpvol_core::asymptotics::Side::Upper).count(),
            fewer.len()
        ),
    );
    line.known = others_ok
        && stated_at == STATED_SANDWICH_FAILURES
        && stated.iter().all(|v| v.side == wpvol_core::asymptotics::Side::Lower);
    line
}

fn scans(f: &FloatEngine) -> Line {
    let (lo, hi) = SCAN_RANGE;
    let a = monotonicity_scan(f, MonotoneKind::GenusInverse, 2, lo, hi, PREC).unwrap();
    let b = monotonicity_scan(f, MonotoneKind::PointInverse, 3, lo, hi, PREC).unwrap();
    let pass = a == MonotoneOutcome::Monotone { g0: GENUS_INVERSE_G0 }
        && b == MonotoneOutcome::Monotone { g0: POINT_INVERSE_G0 };
    Line::new(
        "8",
        "eventual monotonicity",
        pass,
        format!(
            "V_(g-1,4)/V_(g,2) over g = {lo}..{hi}: {a:?} (locked g0 = {GENUS_INVERSE_G0}); \
             8 pi^2 g V_(g,3)/V_(g,4): {b:?} (locked g0 = {POINT_INVERSE_G0})"
        ),
    )
}

/// Growing n like g^(1/3) keeps the normalized volume near the constant.
fn variable_n(f: &FloatEngine) -> Line {
    let c = estimate_c(f, 0, WINDOW.0, WINDOW.1, PREC).unwrap().value_f64();
    let pts = variable_n_check(f, Schedule::CubeRoot, WINDOW.0, WINDOW.1, PREC).unwrap();
    let worst = pts.iter().map(|p| (p.value.to_f64() / c - 1.0).abs()).fold(0.0, f64::max);
    let early = tail_deviation(&pts, WINDOW.0);
    let late = tail_deviation(&pts, WINDOW.0 + 4);
    Line::new(
        "+",
        "slowly growing n",
        worst < 0.25 && late <= early,
        format!(
            "n = floor(g^(1/3)) over g = {}..{}: max relative distance to C {:.2}%; \
             deviation from the last value {early:.2e} from g = {}, {late:.2e} from g = {}",
            WINDOW.0,
            WINDOW.1,
            100.0 * worst,
            WINDOW.0,
            WINDOW.0 + 4
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut lines = vec![identities(), calibration(), moments()];
    for l in &lines {
        l.print();
    }

    let t = Instant::now();
    let f = Engine::float(PREC, EngineConfig::default()).unwrap();
    // Everything the fits need, computed once and concurrently.
    let mut keys = Vec::new();
    for g in WINDOW.0 - 2..=WINDOW.1 {
        for n in 0..=3usize {
            keys.push(BracketKey::volume(g, n));
        }
        keys.push(BracketKey::volume(g - 1, 4));
    }
    f.precompute(&keys).unwrap();
    let checks = expansion_checks(&f, WINDOW.0, WINDOW.1, PREC).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let rest = [first_order(&checks, secs), second_order(&checks), constant(&f)];
    for l in &rest {
        l.print();
    }
    lines.extend(rest);
    let rest = [properties(&f), scans(&f), variable_n(&f)];
    for l in &rest {
        l.print();
    }
    lines.extend(rest);

    let failed: Vec<_> = lines.iter().filter(|l| !l.pass).collect();
    let unexpected = failed.iter().filter(|l| !l.known).count();
    println!(
        "{} checks, {} pass, {} known failure(s), {} unexpected, {:.0} s",
        lines.len(),
        lines.len() - failed.len(),
        failed.len() - unexpected,
        unexpected,
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
