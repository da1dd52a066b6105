//! Report rows, summary counts and CSV/JSON emission.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use approx_groups::entropy::MetricRow;
use approx_groups::ledger::format_float;
use approx_groups::rational::display;
use approx_groups::{ConstantLedger, LedgerRow, RowClass};
use serde::Serialize;

/// One checked inequality. `lhs` and `rhs` are exact (integers verbatim,
/// rationals as `p/q`) except for metric rows, which carry floats with 12
/// significant digits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub group: String,
    pub instance: usize,
    pub label: String,
    pub operation: String,
    pub inequality: String,
    pub lhs: String,
    pub rhs: String,
    pub class: RowClass,
    pub holds: bool,
    pub measured: String,
}

/// Identifies where a batch of rows came from.
#[derive(Clone, Debug)]
pub struct RowSource<'a> {
    pub suite: &'a str,
    pub group: &'a str,
    pub instance: usize,
    pub label: &'a str,
}

impl RowSource<'_> {
    fn row(
        &self,
        operation: &str,
        inequality: &str,
        lhs: String,
        rhs: String,
        class: RowClass,
        holds: bool,
        measured: String,
    ) -> ReportRow {
        ReportRow {
            suite: self.suite.to_string(),
            group: self.group.to_string(),
            instance: self.instance,
            label: self.label.to_string(),
            operation: operation.to_string(),
            inequality: inequality.to_string(),
            lhs,
            rhs,
            class,
            holds,
            measured,
        }
    }

    pub fn ledger_row(&self, operation: &str, r: &LedgerRow) -> ReportRow {
        self.row(
            operation,
            &r.inequality,
            display(&r.lhs),
            display(&r.rhs),
            r.class,
            r.holds(),
            format_float(r.measured_ratio()),
        )
    }

    pub fn ledger(&self, operation: &str, l: &ConstantLedger) -> Vec<ReportRow> {
        l.rows.iter().map(|r| self.ledger_row(operation, r)).collect()
    }

    pub fn metric_row(&self, operation: &str, r: &MetricRow) -> ReportRow {
        let (rhs, measured) = match r.bound {
            Some(b) if b != 0.0 => (format_float(b), format_float(r.value / b)),
            Some(b) => (format_float(b), String::new()),
            None => (String::new(), format_float(r.value)),
        };
        self.row(operation, &r.name, format_float(r.value), rhs, r.class, r.holds(), measured)
    }

    /// An exact integer row `lhs <= rhs`.
    pub fn int_row(&self, operation: &str, inequality: &str, lhs: u128, rhs: u128, class: RowClass) -> ReportRow {
        let measured = if rhs == 0 {
            if lhs == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs as f64 / rhs as f64
        };
        self.row(
            operation,
            inequality,
            lhs.to_string(),
            rhs.to_string(),
            class,
            lhs <= rhs,
            format_float(measured),
        )
    }

    /// An exact equality `lhs = rhs`, recorded as `|lhs - rhs| <= 0`.
    pub fn equality(&self, operation: &str, inequality: &str, lhs: u128, rhs: u128) -> ReportRow {
        self.int_row(
            operation,
            &format!("{inequality} (difference)"),
            lhs.abs_diff(rhs),
            0,
            RowClass::Hard,
        )
    }

    /// A hypothesis that does not hold for this instance; informational only.
    pub fn hypothesis_failure(&self, operation: &str, name: &str, lhs: &str, rhs: &str) -> ReportRow {
        self.row(
            operation,
            &format!("hypothesis: {name}"),
            lhs.to_string(),
            rhs.to_string(),
            RowClass::Soft,
            false,
            String::new(),
        )
    }

    /// A soft informational count with no bound.
    pub fn measurement(&self, operation: &str, name: &str, value: u128) -> ReportRow {
        self.row(
            operation,
            name,
            value.to_string(),
            String::new(),
            RowClass::Soft,
            true,
            String::new(),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub hard: usize,
    pub hard_failures: usize,
    pub soft: usize,
    pub soft_failures: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    summary: Summary,
    rows: &'a [ReportRow],
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = ReportRow>) {
        self.rows.extend(rows);
    }

    /// Stable sort by suite, group and instance; rows of one instance keep
    /// their emission order.
    pub fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| (&a.suite, &a.group, a.instance).cmp(&(&b.suite, &b.group, b.instance)));
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary {
            rows: self.rows.len(),
            ..Summary::default()
        };
        for r in &self.rows {
            match r.class {
                RowClass::Hard => {
                    s.hard += 1;
                    s.hard_failures += usize::from(!r.holds);
                }
                RowClass::Soft => {
                    s.soft += 1;
                    s.soft_failures += usize::from(!r.holds);
                }
            }
        }
        s
    }

    /// True iff every hard row holds; soft rows never fail a run.
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.class == RowClass::Soft || r.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.class == RowClass::Hard && !r.holds)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record([
            "suite",
            "group",
            "instance",
            "label",
            "operation",
            "inequality",
            "lhs",
            "rhs",
            "class",
            "holds",
            "measured",
        ])?;
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&JsonReport {
            summary: self.summary(),
            rows: &self.rows,
        })
        .expect("serializable");
        s.push('\n');
        s
    }

    /// Writes `<stem>.csv` and `<stem>.json`; an existing extension on
    /// `path` is replaced.
    pub fn emit(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let csv_path = path.with_extension("csv");
        let json_path = path.with_extension("json");
        let file = std::fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        std::fs::write(&json_path, self.to_json_string()).with_context(|| format!("writing {}", json_path.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src() -> RowSource<'static> {
        RowSource {
            suite: "s",
            group: "cyclic(4)",
            instance: 0,
            label: "x",
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new();
        assert_eq!(
            r.to_csv_string(),
            "suite,group,instance,label,operation,inequality,lhs,rhs,class,holds,measured\n"
        );
        assert!(r.passes());
    }

    #[test]
    fn single_row_has_exact_integers() {
        let mut r = Report::new();
        r.extend([src().int_row("op", "|A| <= |B|", 12345678901234567890, 12345678901234567891, RowClass::Hard)]);
        let csv = r.to_csv_string();
        let line = csv.lines().nth(1).unwrap();
        assert!(line.contains(",12345678901234567890,12345678901234567891,hard,true,"));
        assert!(r.passes());
    }

    #[test]
    fn soft_failures_do_not_fail() {
        let mut r = Report::new();
        r.extend([src().int_row("op", "a", 2, 1, RowClass::Soft)]);
        assert!(r.passes());
        r.extend([src().int_row("op", "b", 2, 1, RowClass::Hard)]);
        assert!(!r.passes());
        assert_eq!(r.summary().hard_failures, 1);
        assert_eq!(r.summary().soft_failures, 1);
    }
}
