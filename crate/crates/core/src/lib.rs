//! Conditional independence calculus: symbolic separoid deduction, exact
//! checking on finite models, counterexample search and causal applications.

pub mod causal;
pub mod deduction;
pub mod dsl;
pub mod lattice;
pub mod models;
pub mod rational;
pub mod search;

pub use deduction::{Derivation, Engine, Flag, Limits, ProofOutcome, RuleId, RuleSet, RuleSetName};
pub use dsl::{parse_session, parse_statement, DslError, Session};
pub use lattice::{LatticeError, NamedStatement, ReductionRegistry, Statement, Universe, VarKind, VarSet};
pub use rational::Rational;
