//! Finite discrete models and exact independence semantics.

mod checks;
mod distribution;
mod family;
mod io;

use thiserror::Error;

pub use checks::{
    check_eci, check_eci_general, check_pairwise_eci, check_sci, check_sci_constancy, check_statement, check_vci,
    conditional_image, EciOutcome, WitnessTable,
};
pub(crate) use checks::{sci_positions, Split};
pub use distribution::{assignments, DiscreteDistribution};
pub use family::{
    check_complementary, compute_s_z, find_dominating, partition_meet, product_space, DecisionMap, RegimeFamily,
    REGIME_COORDINATE,
};
pub(crate) use family::dominating_index;
pub use io::{Atom, ModelFile, SINGLE_REGIME};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown regime `{0}`")]
    UnknownRegime(String),
    #[error("conditioning event has probability zero")]
    ZeroConditioningEvent,
    #[error("no regime matches the given decision values")]
    EmptyContext,
    #[error("decision variables {0:?} are not complementary")]
    NotComplementary(Vec<String>),
    #[error("malformed statement: {0}")]
    MalformedStatement(String),
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid model file: {0}")]
    Json(String),
}
