//! Oracle-versus-analytic comparison rows.

use crate::output::{num, Csv};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
    /// Set when the oracle could not produce a value.
    pub note: Option<String>,
}

impl ReportRow {
    pub fn new(name: impl Into<String>, analytic: f64, oracle: f64, tolerance: Tolerance) -> Self {
        let abs_err = (oracle - analytic).abs();
        let rel_err = abs_err / analytic.abs();
        let err = match tolerance {
            Tolerance::Absolute(_) => abs_err,
            Tolerance::Relative(_) => rel_err,
        };
        let limit = match tolerance {
            Tolerance::Absolute(t) | Tolerance::Relative(t) => t,
        };
        Self {
            name: name.into(),
            analytic,
            oracle,
            abs_err,
            rel_err,
            tolerance,
            // NaN errors fail
            pass: err <= limit,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, analytic: f64, tolerance: Tolerance, reason: String) -> Self {
        Self {
            note: Some(reason),
            ..Self::new(name, analytic, f64::NAN, tolerance)
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{failed} of {total} comparison rows failed")]
pub struct CompareFailed {
    pub failed: usize,
    pub total: usize,
}

fn tol_fields(t: Tolerance) -> (&'static str, f64) {
    match t {
        Tolerance::Absolute(v) => ("abs", v),
        Tolerance::Relative(v) => ("rel", v),
    }
}

pub fn report_csv(rows: &[ReportRow]) -> Csv {
    let mut csv = Csv::new(&[
        "quantity", "analytic", "oracle", "abs_err", "rel_err", "tol_kind", "tol", "pass", "note",
    ]);
    for r in rows {
        let (kind, tol) = tol_fields(r.tolerance);
        csv.row(&[
            r.name.clone(),
            num(r.analytic),
            num(r.oracle),
            num(r.abs_err),
            num(r.rel_err),
            kind.to_string(),
            num(tol),
            if r.pass { "pass" } else { "fail" }.to_string(),
            r.note.clone().unwrap_or_default().replace([',', '\n'], ";"),
        ]);
    }
    csv
}

pub fn report_table(rows: &[ReportRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
    let mut out = format!(
        "{:<width$}  {:>19}  {:>19}  {:>10}  {:>10}  {:>13}  result\n",
        "quantity", "analytic", "oracle", "abs_err", "rel_err", "tol"
    );
    for r in rows {
        let (kind, tol) = tol_fields(r.tolerance);
        out.push_str(&format!(
            "{:<width$}  {:>19.12e}  {:>19.12e}  {:>10.3e}  {:>10.3e}  {kind} {tol:>9.1e}  {}{}\n",
            r.name,
            r.analytic,
            r.oracle,
            r.abs_err,
            r.rel_err,
            if r.pass { "PASS" } else { "FAIL" },
            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_error_within_tolerance() {
        assert!(ReportRow::new("a", 1.0, 1.0 + 1e-7, Tolerance::Relative(1e-6)).pass);
        assert!(!ReportRow::new("a", 1.0, 1.0 + 1e-5, Tolerance::Relative(1e-6)).pass);
        assert!(ReportRow::new("a", 0.0, 1e-9, Tolerance::Absolute(1e-8)).pass);
        assert!(!ReportRow::failed("a", 1.0, Tolerance::Absolute(1.0), "x".into()).pass);
    }
}
