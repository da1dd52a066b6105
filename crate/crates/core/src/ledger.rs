//! Constant ledgers: named inequalities with their exact sides.

use std::io::Write;

use num_traits::Zero;
use serde::Serialize;

use crate::rational::{display, to_f64, Rational};

/// Hard rows are inequalities with explicit constants and fail a run when
/// violated; soft rows record measured constants against derived bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowClass {
    Hard,
    Soft,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LedgerRow {
    pub inequality: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub bound_formula: String,
    pub class: RowClass,
}

impl LedgerRow {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }

    /// `lhs / rhs` as a float (display only).
    pub fn measured_ratio(&self) -> f64 {
        if self.rhs.is_zero() {
            if self.lhs.is_zero() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            to_f64(&(&self.lhs / &self.rhs))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantLedger {
    pub rows: Vec<LedgerRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    inequality: &'a str,
    lhs: String,
    rhs: String,
    bound_formula: &'a str,
    measured_ratio: String,
}

impl ConstantLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, class: RowClass, name: &str, lhs: Rational, rhs: Rational, formula: &str) -> bool {
        let row = LedgerRow {
            inequality: name.to_string(),
            lhs,
            rhs,
            bound_formula: formula.to_string(),
            class,
        };
        let ok = row.holds();
        self.rows.push(row);
        ok
    }

    /// Records `lhs ≤ rhs` as a hard assertion; returns whether it holds.
    pub fn hard(&mut self, name: &str, lhs: impl Into<Rational>, rhs: impl Into<Rational>, formula: &str) -> bool {
        self.push(RowClass::Hard, name, lhs.into(), rhs.into(), formula)
    }

    /// Records a measured quantity against a bound without asserting it.
    pub fn soft(&mut self, name: &str, lhs: impl Into<Rational>, rhs: impl Into<Rational>, formula: &str) -> bool {
        self.push(RowClass::Soft, name, lhs.into(), rhs.into(), formula)
    }

    pub fn extend(&mut self, other: ConstantLedger) {
        self.rows.extend(other.rows);
    }

    /// Every hard row holds.
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.class == RowClass::Soft || r.holds())
    }

    pub fn failures(&self) -> impl Iterator<Item = &LedgerRow> {
        self.rows.iter().filter(|r| r.class == RowClass::Hard && !r.holds())
    }

    pub fn get(&self, name: &str) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| r.inequality == name)
    }

    /// CSV with columns `inequality, lhs, rhs, bound_formula, measured_ratio`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wr.write_record(["inequality", "lhs", "rhs", "bound_formula", "measured_ratio"])?;
        }
        for r in &self.rows {
            wr.serialize(CsvRow {
                inequality: &r.inequality,
                lhs: display(&r.lhs),
                rhs: display(&r.rhs),
                bound_formula: &r.bound_formula,
                measured_ratio: format_float(r.measured_ratio()),
            })?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory CSV write");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Fixed 12-significant-digit rendering used in every report.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn hard_and_soft_rows() {
        let mut l = ConstantLedger::new();
        assert!(l.hard("a", int(3), int(4), "4"));
        assert!(!l.soft("b", int(5), int(4), "4"));
        assert!(l.passes());
        assert!(!l.hard("c", ratio(9, 2), int(4), "4"));
        assert!(!l.passes());
        assert_eq!(l.failures().count(), 1);
    }

    #[test]
    fn csv_columns() {
        let mut l = ConstantLedger::new();
        l.hard("x, y", int(2), int(4), "2^n");
        let s = l.to_csv_string();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("inequality,lhs,rhs,bound_formula,measured_ratio"));
        assert_eq!(lines.next(), Some("\"x, y\",2,4,2^n,5.00000000000e-1"));
        assert_eq!(
            ConstantLedger::new().to_csv_string().trim(),
            "inequality,lhs,rhs,bound_formula,measured_ratio"
        );
    }
}
