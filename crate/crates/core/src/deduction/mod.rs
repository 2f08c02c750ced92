//! Symbolic deduction over independence statements.

mod engine;
mod proof;
mod rules;

pub use engine::{ClosureResult, DeductionError, Engine, Limits, ProofOutcome};
pub use proof::{
    derivation_from_json, derivation_to_json, format_proof, verify_derivation, verify_proof_text, Derivation,
    ReplayError, Step,
};
pub use rules::{Flag, RuleId, RuleSet, RuleSetName};
