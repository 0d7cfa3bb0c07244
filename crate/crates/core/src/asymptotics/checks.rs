//! Fitted coefficients compared with their closed forms, with the window
//! shift test that decides whether a fit is trusted.

use serde::Serialize;

use super::fit::{fit_expansion, FitMethod};
use super::predicted::{predicted, Params, PredictedCoefficient};
use super::series::{series, SeriesKind, SeriesSpec};
use super::source::BracketSource;
use crate::error::Result;

/// Expansion order of every acceptance fit.
pub const CHECK_ORDER: usize = 4;
/// How far the window is moved down for the stability test.
pub const WINDOW_SHIFT: u32 = 2;
/// Largest relative change of the coefficient under the shift.
pub const MAX_SHIFT_CHANGE: f64 = 0.10;

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCheck {
    pub series: SeriesKind,
    pub index: usize,
    pub predicted: String,
    pub closed_form: String,
    pub predicted_value: f64,
    pub fitted: f64,
    pub uncertainty: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub window: (u32, u32),
    pub order: usize,
    /// The same coefficient fitted on the window moved down by `WINDOW_SHIFT`.
    pub shifted: f64,
    pub shift_change: f64,
    pub ill_conditioned: bool,
    /// Soft checks only warn.
    pub soft: bool,
    pub pass: bool,
}

impl CoefficientCheck {
    pub fn label(&self) -> String {
        format!("u{} of {} vs {}", self.index, self.series, self.predicted)
    }

    pub fn detail(&self) -> String {
        format!(
            "fitted {:.8} predicted {:.8} rel err {:.2e} (tol {}) shift change {:.2e}{}",
            self.fitted,
            self.predicted_value,
            self.relative_error,
            self.tolerance,
            self.shift_change,
            if self.soft && !self.pass { " [soft: warning only]" } else { "" }
        )
    }
}

/// Fits `kind` on `[g_lo, g_hi]` and on the shifted window and compares
/// coefficient `index` with `pred`.
#[allow(clippy::too_many_arguments)]
pub fn coefficient_check(
    source: &dyn BracketSource,
    kind: SeriesKind,
    index: usize,
    pred: &PredictedCoefficient,
    tolerance: f64,
    g_lo: u32,
    g_hi: u32,
    order: usize,
    prec: u32,
    soft: bool,
) -> Result<CoefficientCheck> {
    let lo = g_lo.saturating_sub(WINDOW_SHIFT).max(kind.min_genus());
    let all = series(source, &SeriesSpec::new(kind, lo, g_hi)?, prec)?;
    let main: Vec<_> = all.iter().filter(|p| p.g >= g_lo).cloned().collect();
    let shifted: Vec<_> = all.iter().filter(|p| p.g + WINDOW_SHIFT <= g_hi && p.g + WINDOW_SHIFT >= g_lo).cloned().collect();
    let fit = fit_expansion(&main, order, FitMethod::Richardson)?;
    let fit_s = fit_expansion(&shifted, order, FitMethod::Richardson)?;
    let want = pred.value.to_float(prec.max(128)).to_f64();
    let got = fit.u_f64(index);
    let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
    let s = fit_s.u_f64(index);
    let shift_change = if got == 0.0 { s.abs() } else { ((s - got) / got).abs() };
    let ill = fit.ill_conditioned || fit_s.ill_conditioned;
    Ok(CoefficientCheck {
        series: kind,
        index,
        predicted: pred.name.clone(),
        closed_form: pred.value.to_string(),
        predicted_value: want,
        fitted: got,
        uncertainty: fit.uncertainty_f64(index),
        relative_error: rel,
        tolerance,
        window: (g_lo, g_hi),
        order,
        shifted: s,
        shift_change,
        ill_conditioned: ill,
        soft,
        pass: rel <= tolerance && shift_change < MAX_SHIFT_CHANGE && !ill,
    })
}

/// The first-order comparisons, then the second-order ones for
/// `[tau_0 tau_k]_{g,2} / V_{g,2}`. Second-order checks from k = 3 on use
/// the interpolated polynomial and are soft.
pub fn expansion_checks(source: &dyn BracketSource, g_lo: u32, g_hi: u32, prec: u32) -> Result<Vec<CoefficientCheck>> {
    let p = |name: &str, n: u32, k: u32| predicted(name, Params { n: n.into(), k: k.into() });
    let mut plan: Vec<(SeriesKind, usize, PredictedCoefficient, f64, bool)> = Vec::new();
    plan.push((SeriesKind::TauRatio { n: 2, k: 1 }, 1, p("e1", 2, 1)?, 0.02, false));
    for n in 0..=2 {
        plan.push((SeriesKind::VRatioNInverse { n }, 1, p("a1-inverse", n, 0)?, 0.02, false));
    }
    for n in 0..=2 {
        plan.push((SeriesKind::VRatioG { n }, 1, p("b1", n, 0)?, 0.02, false));
    }
    for n in 0..=1 {
        plan.push((SeriesKind::EulerRatio { n }, 1, p("eqn", n, 0)?, 0.02, false));
    }
    for k in 1..=4 {
        plan.push((SeriesKind::TauRatio { n: 2, k }, 2, p("tau0tauk-2", 2, k)?, 0.10, k >= 3));
    }
    plan.into_iter()
        .map(|(kind, index, pred, tol, soft)| {
            coefficient_check(source, kind, index, &pred, tol, g_lo, g_hi, CHECK_ORDER, prec, soft)
        })
        .collect()
}
