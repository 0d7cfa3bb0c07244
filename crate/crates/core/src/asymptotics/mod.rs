//! Ratio sequences in the large-genus regime, their 1/g expansions, and the
//! closed forms they are compared against.

mod checks;
mod constant;
mod fit;
mod predicted;
mod report;
mod scan;
mod series;
mod source;

pub use checks::{coefficient_check, expansion_checks, CoefficientCheck, CHECK_ORDER, MAX_SHIFT_CHANGE, WINDOW_SHIFT};
pub use constant::{
    estimate_c, estimate_c_with_order, increment_witness, tail_deviation, variable_n_check, CEstimate,
    IncrementWitness, Schedule, VariablePoint, C_ORDER,
};
pub use fit::{fit_expansion, ExpansionFit, FitMethod};
pub use predicted::{first_order_for, predicted, second_order_for, Params, PredictedCoefficient, PREDICTED_NAMES};
pub use report::{compare, write_series_csv, Comparison, FitReport};
pub use scan::{
    boundedness_scans, chain_violations, monotonicity_scan, sandwich_violations, subsurface_residual,
    BoundednessScan, MonotoneKind, MonotoneOutcome, SandwichLower, SandwichViolation, Side, Violation,
};
pub use series::{parse_range, series, SeriesKind, SeriesPoint, SeriesSpec};
pub use source::BracketSource;
