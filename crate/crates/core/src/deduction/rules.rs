//! Inference rules and the named rule sets.
//!
//! Rule schemas use the letters of the usual separoid presentation: a
//! premise `X ⊥ Y | Z` with `W ⪯ Y` and so on. Slots are variable sets, and
//! `W ⪯ Y` is instantiated by every subset of the reduction closure of `Y`
//! (members of `Y` plus anything registered below one of them).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lattice::{Statement, Universe};

/// Side conditions under which the mirrored weak-union rule is sound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    DiscreteRegimeSpace,
    DiscreteVariables,
    DominatingRegime,
    PairwiseSemantics,
}

impl Flag {
    pub const ALL: [Flag; 4] =
        [Flag::DiscreteRegimeSpace, Flag::DiscreteVariables, Flag::DominatingRegime, Flag::PairwiseSemantics];

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::DiscreteRegimeSpace => "discrete_regime_space",
            Flag::DiscreteVariables => "discrete_variables",
            Flag::DominatingRegime => "dominating_regime",
            Flag::PairwiseSemantics => "pairwise_semantics",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Flag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Flag::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| format!("unknown flag `{s}`"))
    }
}

/// Every rule the engine knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    /// symmetry
    P1,
    /// `X ⊥ Y | Y`
    P2,
    /// decomposition
    P3,
    /// weak union
    P4,
    /// contraction
    P5,
    /// symmetry when every decision variable is conditioned on
    P1e,
    /// `X ⊥ (Y,Σ) | (Y,Σ)` for a complementary family `Σ`
    P2e,
    P3e,
    P4e,
    P5e,
    /// `X ⊥ (Y,Θ) | (Z,Φ)` ⇒ `X ⊥ Y | (Z,Φ,Θ)`
    Split,
    /// decomposition on the left slot
    P3m,
    /// weak union by a reduction of the left slot; needs a licensing flag
    P4m,
    /// contraction on the left slot
    P5m,
    P1g,
    P2g,
    P3g,
    P4g,
    P5g,
}

impl RuleId {
    pub const ALL: [RuleId; 19] = [
        RuleId::P1,
        RuleId::P2,
        RuleId::P3,
        RuleId::P4,
        RuleId::P5,
        RuleId::P1e,
        RuleId::P2e,
        RuleId::P3e,
        RuleId::P4e,
        RuleId::P5e,
        RuleId::Split,
        RuleId::P3m,
        RuleId::P4m,
        RuleId::P5m,
        RuleId::P1g,
        RuleId::P2g,
        RuleId::P3g,
        RuleId::P4g,
        RuleId::P5g,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::P1 => "P1",
            RuleId::P2 => "P2",
            RuleId::P3 => "P3",
            RuleId::P4 => "P4",
            RuleId::P5 => "P5",
            RuleId::P1e => "P1'",
            RuleId::P2e => "P2'",
            RuleId::P3e => "P3'",
            RuleId::P4e => "P4'",
            RuleId::P5e => "P5'",
            RuleId::Split => "SPLIT'",
            RuleId::P3m => "P3''",
            RuleId::P4m => "P4''",
            RuleId::P5m => "P5''",
            RuleId::P1g => "P1g",
            RuleId::P2g => "P2g",
            RuleId::P3g => "P3g",
            RuleId::P4g => "P4g",
            RuleId::P5g => "P5g",
        }
    }

    /// Number of independence premises (reductions are not counted).
    pub fn arity(self) -> usize {
        match self {
            RuleId::P2 | RuleId::P2e | RuleId::P2g => 0,
            RuleId::P5 | RuleId::P5e | RuleId::P5m | RuleId::P5g => 2,
            _ => 1,
        }
    }

    /// Rules that only fire when the rule set carries at least one flag.
    pub fn needs_flag(self) -> bool {
        matches!(self, RuleId::P4m | RuleId::P4g)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        RuleId::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleSetName {
    #[serde(rename = "SEPAROID_FULL")]
    SeparoidFull,
    #[serde(rename = "VCI_STRONG")]
    VciStrong,
    #[serde(rename = "ECI_RESTRICTED")]
    EciRestricted,
    #[serde(rename = "GENERAL")]
    General,
}

impl RuleSetName {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleSetName::SeparoidFull => "SEPAROID_FULL",
            RuleSetName::VciStrong => "VCI_STRONG",
            RuleSetName::EciRestricted => "ECI_RESTRICTED",
            RuleSetName::General => "GENERAL",
        }
    }
}

impl fmt::Display for RuleSetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleSetName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [RuleSetName::SeparoidFull, RuleSetName::VciStrong, RuleSetName::EciRestricted, RuleSetName::General]
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown rule set `{s}`"))
    }
}

/// A named, ordered collection of rules plus the side-condition flags in force.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub name: RuleSetName,
    pub rules: Vec<RuleId>,
    pub flags: BTreeSet<Flag>,
}

impl RuleSet {
    pub fn new(name: RuleSetName) -> Self {
        let rules = match name {
            RuleSetName::SeparoidFull | RuleSetName::VciStrong => {
                vec![RuleId::P1, RuleId::P2, RuleId::P3, RuleId::P4, RuleId::P5]
            }
            RuleSetName::EciRestricted => vec![
                RuleId::P1e,
                RuleId::P2e,
                RuleId::P3e,
                RuleId::P4e,
                RuleId::P5e,
                RuleId::P3m,
                RuleId::P4m,
                RuleId::P5m,
                RuleId::Split,
            ],
            RuleSetName::General => vec![RuleId::P1g, RuleId::P2g, RuleId::P3g, RuleId::P4g, RuleId::P5g],
        };
        RuleSet { name, rules, flags: BTreeSet::new() }
    }

    pub fn separoid_full() -> Self {
        Self::new(RuleSetName::SeparoidFull)
    }

    pub fn vci_strong() -> Self {
        Self::new(RuleSetName::VciStrong)
    }

    pub fn eci_restricted() -> Self {
        Self::new(RuleSetName::EciRestricted)
    }

    pub fn general() -> Self {
        Self::new(RuleSetName::General)
    }

    pub fn with_flag(mut self, flag: Flag) -> Self {
        self.flags.insert(flag);
        self
    }

    pub fn with_flags(mut self, flags: impl IntoIterator<Item = Flag>) -> Self {
        self.flags.extend(flags);
        self
    }

    /// Position of a rule in declared order, used for tie-breaking.
    pub fn rank(&self, rule: RuleId) -> Option<usize> {
        self.rules.iter().position(|r| *r == rule)
    }

    /// Rules that actually fire: flag-gated rules drop out without flags.
    pub fn active_rules(&self) -> impl Iterator<Item = RuleId> + '_ {
        self.rules.iter().copied().filter(move |r| !r.needs_flag() || !self.flags.is_empty())
    }

    /// The flag recorded as licensing a flag-gated step (lowest in order).
    pub fn licensing_flag(&self) -> Option<Flag> {
        self.flags.iter().next().copied()
    }

    /// Whether a statement may appear anywhere in a derivation under this set.
    pub fn admits(&self, stmt: &Statement, universe: &Universe) -> bool {
        if stmt.left.is_empty() || stmt.right.is_empty() {
            return false;
        }
        match self.name {
            RuleSetName::SeparoidFull => stmt.is_pure_stochastic() || stmt.is_pure_decision(),
            RuleSetName::VciStrong => stmt.is_pure_decision(),
            RuleSetName::EciRestricted => !stmt.is_general() && universe.well_formed(stmt, false),
            RuleSetName::General => universe.well_formed(stmt, true),
        }
    }

    /// Guard of `rule` on a single premise statement.
    pub fn guard(&self, rule: RuleId, stmt: &Statement, universe: &Universe) -> bool {
        if !self.admits(stmt, universe) {
            return false;
        }
        match rule {
            RuleId::P1e => stmt.right.dec == 0,
            RuleId::Split => stmt.right.dec != 0 && stmt.right.stoch != 0,
            _ => true,
        }
    }

    /// Pick a rule set from the shape of the statements involved.
    pub fn infer<'a>(stmts: impl IntoIterator<Item = &'a Statement>) -> RuleSetName {
        let mut any_dec = false;
        let mut all_dec = true;
        let mut general = false;
        for s in stmts {
            any_dec |= s.dec_union() != 0;
            all_dec &= s.is_pure_decision();
            general |= s.is_general();
        }
        if !any_dec {
            RuleSetName::SeparoidFull
        } else if all_dec {
            RuleSetName::VciStrong
        } else if general {
            RuleSetName::General
        } else {
            RuleSetName::EciRestricted
        }
    }
}
