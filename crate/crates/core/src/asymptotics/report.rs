use std::io::Write;

use serde::Serialize;

use super::fit::ExpansionFit;
use super::predicted::PredictedCoefficient;
use super::series::{SeriesKind, SeriesPoint};
use crate::arith::format_float;
use crate::error::Result;

/// Writes `g,value,precision_bits` rows.
pub fn write_series_csv<W: Write>(out: W, points: &[SeriesPoint], digits: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["g", "value", "precision_bits"])?;
    for p in points {
        w.write_record([p.g.to_string(), format_float(&p.value, digits), p.value.prec().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Comparison of one fitted coefficient with its closed form.
#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub index: usize,
    pub predicted: String,
    pub closed_form: String,
    pub predicted_value: f64,
    pub fitted: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn compare(fit: &ExpansionFit, index: usize, predicted: &PredictedCoefficient, tolerance: f64) -> Comparison {
    let want = predicted.value.to_float(fit.precision.max(128)).to_f64();
    let got = fit.u_f64(index);
    let relative_error = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
    Comparison {
        index,
        predicted: predicted.name.clone(),
        closed_form: predicted.value.to_string(),
        predicted_value: want,
        fitted: got,
        relative_error,
        tolerance,
        pass: relative_error <= tolerance && !fit.ill_conditioned,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub series: SeriesKind,
    pub mode: String,
    pub fit: ExpansionFit,
    pub comparisons: Vec<Comparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl FitReport {
    pub fn pass(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    #[test]
    fn csv_layout() {
        let pts = vec![
            SeriesPoint { g: 3, value: Float::with_val(128, 0.5) },
            SeriesPoint { g: 4, value: Float::with_val(128, 0.25) },
        ];
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &pts, 10).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "g,value,precision_bits");
        assert!(lines[1].starts_with("3,5.0"));
        assert!(lines[2].ends_with(",128"));
    }
}
