//! Set-family generators, suite runner and report emission for
//! `approx-groups`.
//!
//! A run is described by a [`SuiteConfig`]; [`run_suite`] executes each
//! named suite over its groups and set families and returns a [`Report`]
//! whose rows are sorted and formatted deterministically, so identical
//! configurations give byte-identical CSV and JSON output.

pub mod config;
pub mod family;
pub mod report;
pub mod suites;

pub use config::{SuiteConfig, SuiteSpec, SUITES};
pub use family::{generate_set, random_subsets, CosetSide, SetFamilySpec};
pub use report::{Report, ReportRow, RowSource, Summary};
pub use suites::{instances, run_one, run_suite, Instance};
