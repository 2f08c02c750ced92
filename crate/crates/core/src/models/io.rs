//! JSON model files.
//!
//! ```json
//! {"regimes": ["s0", "s1"],
//!  "decision_vars": {"Sigma": {"s0": "0", "s1": "1"}},
//!  "variables": {"X": ["0", "1"], "T": ["0", "1"]},
//!  "distributions": {"s0": [{"assign": {"X": "0", "T": "1"}, "p": "1/4"}, ...], ...}}
//! ```
//!
//! A single distribution omits `regimes` and `decision_vars` and gives its
//! atoms under `distribution`. Atoms not listed have probability zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::distribution::DiscreteDistribution;
use super::family::{DecisionMap, RegimeFamily};
use super::ModelError;
use crate::causal::InfoBase;
use crate::rational::Rational;

/// Label of the lone regime when a single distribution is read as a family.
pub const SINGLE_REGIME: &str = "obs";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub assign: BTreeMap<String, String>,
    pub p: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub decision_vars: BTreeMap<String, BTreeMap<String, String>>,
    pub variables: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distributions: Option<BTreeMap<String, Vec<Atom>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub info_base: Option<InfoBase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
}

fn atoms_of(d: &DiscreteDistribution) -> Vec<Atom> {
    (0..d.num_atoms())
        .filter(|&i| !d.pmf()[i].is_zero())
        .map(|i| {
            let atom = d.atom(i);
            let assign = atom.iter().enumerate().map(|(v, &k)| (d.names()[v].clone(), d.values(v)[k].clone())).collect();
            Atom { assign, p: d.pmf()[i] }
        })
        .collect()
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files serialize")
    }

    pub fn is_single(&self) -> bool {
        self.regimes.is_none()
    }

    fn signature(&self) -> Vec<(String, Vec<String>)> {
        self.variables.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    fn build(&self, atoms: &[Atom]) -> Result<DiscreteDistribution, ModelError> {
        DiscreteDistribution::from_entries(self.signature(), atoms.iter().map(|a| (a.assign.clone(), a.p)))
    }

    /// The model as a family; a single distribution becomes one regime.
    pub fn family(&self) -> Result<RegimeFamily, ModelError> {
        match (&self.regimes, &self.distributions, &self.distribution) {
            (None, None, Some(atoms)) => {
                if !self.decision_vars.is_empty() {
                    return Err(ModelError::InvalidModel("decision variables need a list of regimes".into()));
                }
                Ok(RegimeFamily::single(SINGLE_REGIME, self.build(atoms)?))
            }
            (Some(regimes), Some(dists), None) => {
                let mut list = Vec::with_capacity(regimes.len());
                for r in regimes {
                    let atoms =
                        dists.get(r).ok_or_else(|| ModelError::InvalidModel(format!("no distribution for regime `{r}`")))?;
                    list.push((r.clone(), self.build(atoms)?));
                }
                if let Some(extra) = dists.keys().find(|k| !regimes.contains(k)) {
                    return Err(ModelError::InvalidModel(format!("distribution for undeclared regime `{extra}`")));
                }
                let mut dm = DecisionMap::new(regimes.clone());
                for (name, vals) in &self.decision_vars {
                    let column = regimes
                        .iter()
                        .map(|r| {
                            vals.get(r).cloned().ok_or_else(|| {
                                ModelError::InvalidModel(format!("decision variable `{name}` has no value at `{r}`"))
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    dm.insert(name, column)?;
                }
                RegimeFamily::new(list, dm)
            }
            _ => Err(ModelError::InvalidModel(
                "expected either `distribution` alone or `regimes` with `distributions`".into(),
            )),
        }
    }

    pub fn single_distribution(&self) -> Result<DiscreteDistribution, ModelError> {
        match &self.distribution {
            Some(atoms) if self.regimes.is_none() => self.build(atoms),
            _ => Err(ModelError::InvalidModel("not a single-distribution model".into())),
        }
    }

    pub fn from_distribution(d: &DiscreteDistribution) -> Self {
        ModelFile {
            variables: d.signature().into_iter().collect(),
            distribution: Some(atoms_of(d)),
            ..Default::default()
        }
    }

    pub fn from_family(fam: &RegimeFamily) -> Self {
        let regimes = fam.regimes().to_vec();
        let decision_vars = fam
            .decisions()
            .names()
            .map(|n| {
                let vals = fam.decisions().values(n).expect("declared");
                (n.to_string(), regimes.iter().cloned().zip(vals.iter().cloned()).collect())
            })
            .collect();
        ModelFile {
            regimes: Some(regimes.clone()),
            decision_vars,
            variables: fam.dist(0).signature().into_iter().collect(),
            distributions: Some(regimes.iter().zip(fam.dists()).map(|(r, d)| (r.clone(), atoms_of(d))).collect()),
            ..Default::default()
        }
    }
}
