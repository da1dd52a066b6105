//! Exact product-set combinatorics over finite groups.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`] builds concrete finite groups (cyclic, products, dihedral,
//!   symmetric, `SL2(F_p)`, Heisenberg) with dense element ids, plus quotient
//!   views by normal subgroups.
//! * [`setcalc`] is the measurement layer: product sets, convolution
//!   profiles, multiplicative energy and Ruzsa distance, all in exact integer
//!   arithmetic.
//! * [`structure`] implements the covering lemma, approximate-group
//!   verification, the symmetric core construction and the constructive
//!   classifications of sets of small tripling and small doubling.
//! * [`bsg`] runs the weak and full Balog-Szemerédi-Gowers extractions.
//! * [`heisenberg`] contains the splitting lemmas and the inverse theorem
//!   for Heisenberg groups.
//! * [`entropy`] measures covering numbers and approximate energies of point
//!   clouds in metric groups (tori, unit quaternions, word metrics).
//!
//! Every inequality that has an explicit constant is checked on
//! cross-multiplied integers; floating point only appears in display values
//! and in the metric-entropy module.

pub mod bitset;
pub mod bsg;
pub mod entropy;
pub mod error;
pub mod group;
pub mod heisenberg;
pub mod ledger;
pub mod par;
pub mod rational;
pub mod setcalc;
pub mod structure;

pub use bitset::Bitset;
pub use error::{Error, Result};
pub use group::{Elem, FiniteGroup, GroupSpec, NormalSubgroupView};
pub use ledger::{ConstantLedger, LedgerRow, RowClass};
pub use rational::Rational;
pub use setcalc::MSet;
