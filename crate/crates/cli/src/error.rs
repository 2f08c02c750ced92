use eci_core::causal::CausalError;
use eci_core::deduction::{DeductionError, ReplayError};
use eci_core::models::ModelError;
use eci_core::search::SearchError;
use eci_core::{DslError, LatticeError};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Causal(#[from] CausalError),
}

fn lattice_code(e: &LatticeError) -> &'static str {
    match e {
        LatticeError::UnknownVariable(_) => "E_UNKNOWN_VARIABLE",
        LatticeError::DuplicateVariable(_) => "E_DUPLICATE_VARIABLE",
        LatticeError::KindMismatch(..) => "E_KIND_MISMATCH",
        LatticeError::NotDecision(_) | LatticeError::EmptyFamily => "E_BAD_FAMILY",
        LatticeError::TooManyVariables => "E_TOO_MANY_VARIABLES",
        LatticeError::InvalidName(_) => "E_INVALID_NAME",
    }
}

fn model_code(e: &ModelError) -> &'static str {
    match e {
        ModelError::UnknownVariable(_) => "E_UNKNOWN_VARIABLE",
        ModelError::UnknownRegime(_) => "E_UNKNOWN_REGIME",
        ModelError::ZeroConditioningEvent => "E_ZERO_CONDITIONING",
        ModelError::EmptyContext => "E_EMPTY_CONTEXT",
        ModelError::NotComplementary(_) => "E_NOT_COMPLEMENTARY",
        ModelError::MalformedStatement(_) => "E_MALFORMED_STATEMENT",
        ModelError::InvalidPrior(_) => "E_INVALID_PRIOR",
        ModelError::InvalidModel(_) | ModelError::Json(_) => "E_INVALID_MODEL",
    }
}

impl CliError {
    /// Stable identifier for scripts consuming `--json` output.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "E_IO",
            CliError::Usage(_) => "E_USAGE",
            CliError::Dsl(DslError::Parse { .. }) => "E_PARSE",
            CliError::Dsl(DslError::IllFormed(_)) => "E_ILL_FORMED",
            CliError::Dsl(DslError::Lattice(e)) | CliError::Lattice(e) => lattice_code(e),
            CliError::Deduction(DeductionError::GuardViolation { .. }) => "E_GUARD_VIOLATION",
            CliError::Deduction(DeductionError::RuleNotInSet { .. }) => "E_RULE_NOT_IN_SET",
            CliError::Deduction(DeductionError::Unlicensed(_)) => "E_UNLICENSED_RULE",
            CliError::Deduction(DeductionError::IllFormed { .. }) => "E_ILL_FORMED",
            CliError::Deduction(DeductionError::InvalidLimits) => "E_INVALID_LIMITS",
            CliError::Replay(_) => "E_REPLAY",
            CliError::Model(e) | CliError::Search(SearchError::Model(e)) | CliError::Causal(CausalError::Model(e)) => {
                model_code(e)
            }
            CliError::Search(SearchError::SemanticsMismatch(_)) => "E_SEMANTICS_MISMATCH",
            CliError::Search(SearchError::InvalidConfig(_)) => "E_INVALID_CONFIG",
            CliError::Search(SearchError::Lattice(e)) => lattice_code(e),
            CliError::Causal(CausalError::ReductionMissing { .. }) => "E_REDUCTION_MISSING",
            CliError::Causal(CausalError::NotIntervention(_)) => "E_NOT_INTERVENTION",
            CliError::Causal(CausalError::NotNumeric(_)) => "E_NOT_NUMERIC",
            CliError::Causal(CausalError::StabilityViolated(_)) => "E_STABILITY_VIOLATED",
            CliError::Causal(CausalError::PositivityViolated(_)) => "E_POSITIVITY_VIOLATED",
            CliError::Causal(CausalError::InvalidInfoBase(_)) => "E_INVALID_INFO_BASE",
            CliError::Causal(CausalError::InvalidStrategy(_)) => "E_INVALID_STRATEGY",
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"error": {"code": self.code(), "message": self.to_string()}})
    }
}
