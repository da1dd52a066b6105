use thiserror::Error;

use crate::group::Elem;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCap { order: u128, cap: usize },

    #[error("invalid group parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("malformed pairing: {0}")]
    MalformedPairing(String),

    #[error("element id {id} is out of range for a group of order {order}")]
    ElementOutOfRange { id: Elem, order: usize },

    #[error("sets live in different groups ({left} vs {right})")]
    GroupMismatch { left: String, right: String },

    #[error("a multiplicative set must be nonempty")]
    EmptySet,

    #[error("subgroup is not normal: {g} * {h} * {g}^-1 is not a member")]
    NotNormal { g: Elem, h: Elem },

    #[error("set is not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("sign pattern of length {len} exceeds the cap {cap}")]
    SignCap { len: usize, cap: usize },

    #[error("hypothesis fails: {name} ({lhs} > {rhs})")]
    Hypothesis { name: String, lhs: String, rhs: String },

    #[error("pipeline stage `{0}` produced an empty set")]
    EmptyStage(String),

    #[error("relation is invalid: {0}")]
    InvalidRelation(String),

    #[error("W has 2-torsion: 2 * {0} = 0")]
    TwoTorsion(Elem),

    #[error("quadruple candidate count {count} exceeds the cap {cap}")]
    EnergyCap { count: u128, cap: u128 },

    #[error("point cloud of {count} points exceeds the cap {cap}")]
    CloudCap { count: usize, cap: usize },

    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("witness is invalid: {0}")]
    InvalidWitness(String),
}

impl Error {
    pub(crate) fn hypothesis(name: impl Into<String>, lhs: impl ToString, rhs: impl ToString) -> Self {
        Error::Hypothesis {
            name: name.into(),
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
        }
    }
}
