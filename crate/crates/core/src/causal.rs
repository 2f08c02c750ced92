//! Causal and statistical applications on regime families.
//!
//! Regime labels are fixed: `obs` is the observational regime, and `do0` and
//! `do1` are the interventions setting a binary treatment to `0` and `1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{NamedStatement, ReductionRegistry};
use crate::models::{assignments, check_eci, Atom, DiscreteDistribution, ModelError, RegimeFamily};
use crate::rational::Rational;

pub const OBS: &str = "obs";
pub const DO0: &str = "do0";
pub const DO1: &str = "do1";
const IDENTITY: &str = "Sigma";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CausalError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{statistic:?}` is not a registered function of `{data:?}`")]
    ReductionMissing { statistic: Vec<String>, data: Vec<String> },
    #[error("regime `{0}` does not set the treatment with probability 1")]
    NotIntervention(String),
    #[error("value `{0}` is not numeric")]
    NotNumeric(String),
    #[error("simple stability fails at stage {0}")]
    StabilityViolated(usize),
    #[error("observational probability of reachable context {0} is zero")]
    PositivityViolated(String),
    #[error("invalid information base: {0}")]
    InvalidInfoBase(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

/// Time-ordered groups `L₁, A₁, …, Lₙ, Aₙ, Lₙ₊₁`, the last being the response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoBase {
    pub observables: Vec<Vec<String>>,
    pub actions: Vec<Vec<String>>,
    /// Unmeasured groups `U₁ … Uₙ₊₁`, aligned with `observables`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmeasured: Vec<Vec<String>>,
}

impl InfoBase {
    pub fn new(observables: Vec<Vec<String>>, actions: Vec<Vec<String>>) -> Self {
        InfoBase { observables, actions, unmeasured: Vec::new() }
    }

    pub fn stages(&self) -> usize {
        self.actions.len()
    }

    pub fn response(&self) -> &[String] {
        self.observables.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn validate(&self, fam: &RegimeFamily) -> Result<(), CausalError> {
        if self.observables.len() != self.actions.len() + 1 {
            return Err(CausalError::InvalidInfoBase("need one more observable group than action groups".into()));
        }
        if self.response().is_empty() {
            return Err(CausalError::InvalidInfoBase("the response group is empty".into()));
        }
        if !self.unmeasured.is_empty() && self.unmeasured.len() != self.observables.len() {
            return Err(CausalError::InvalidInfoBase("unmeasured groups must align with observable groups".into()));
        }
        let mut seen = Vec::new();
        for n in self.observables.iter().chain(&self.actions).chain(&self.unmeasured).flatten() {
            if fam.dist(0).position(n).is_none() {
                return Err(CausalError::Model(ModelError::UnknownVariable(n.clone())));
            }
            if seen.contains(n) {
                return Err(CausalError::InvalidInfoBase(format!("`{n}` appears in two groups")));
            }
            seen.push(n.clone());
        }
        Ok(())
    }

    /// Observed variables preceding `L_i` (1-based): `L̄_{i−1}, Ā_{i−1}` in time order.
    fn history_before(&self, i: usize) -> Vec<String> {
        let mut h = Vec::new();
        for j in 0..i - 1 {
            h.extend(self.observables[j].iter().cloned());
            h.extend(self.actions[j].iter().cloned());
        }
        h
    }
}

/// One row of a stage kernel: applies to every history agreeing with `history`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelRow {
    #[serde(default)]
    pub history: BTreeMap<String, String>,
    pub actions: Vec<Atom>,
}

/// A treatment strategy: per stage, action distributions given the observed history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub regime: String,
    pub stages: Vec<Vec<KernelRow>>,
}

impl Strategy {
    pub fn parse(text: &str) -> Result<Self, CausalError> {
        serde_json::from_str(text).map_err(|e| CausalError::InvalidStrategy(e.to_string()))
    }

    fn validate(&self, ib: &InfoBase) -> Result<(), CausalError> {
        if self.stages.len() != ib.stages() {
            return Err(CausalError::InvalidStrategy(format!(
                "{} stage kernels for {} action groups",
                self.stages.len(),
                ib.stages()
            )));
        }
        for (i, rows) in self.stages.iter().enumerate() {
            for row in rows {
                if row.actions.iter().map(|a| a.p).sum::<Rational>() != Rational::one()
                    || row.actions.iter().any(|a| a.p.is_negative())
                {
                    return Err(CausalError::InvalidStrategy(format!("stage {} kernel is not a distribution", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// Action distribution at stage `i` (0-based) for a full history.
    fn kernel(&self, i: usize, history: &BTreeMap<String, String>) -> Result<&[Atom], CausalError> {
        let mut hits = self.stages[i]
            .iter()
            .filter(|row| row.history.iter().all(|(k, v)| history.get(k) == Some(v)));
        match (hits.next(), hits.next()) {
            (Some(row), None) => Ok(&row.actions),
            (None, _) => Err(CausalError::InvalidStrategy(format!("stage {} has no row for {history:?}", i + 1))),
            (Some(_), Some(_)) => {
                Err(CausalError::InvalidStrategy(format!("stage {} has several rows for {history:?}", i + 1)))
            }
        }
    }
}

fn with_identity(fam: &RegimeFamily) -> (RegimeFamily, String) {
    let mut f = fam.clone();
    let id = f.ensure_identity(IDENTITY);
    (f, id)
}

fn eci_against_regimes(fam: &RegimeFamily, left: &[String], cond: &[String]) -> Result<bool, CausalError> {
    let (f, id) = with_identity(fam);
    let stmt = NamedStatement { left: left.to_vec(), right: vec![id], cond: cond.to_vec() };
    Ok(check_eci(&f, &stmt)?.holds)
}

/// `T ⊥ Σ`: the distribution of `T` is the same in every regime.
pub fn check_ancillarity<S: AsRef<str>>(fam: &RegimeFamily, t: &[S]) -> Result<bool, CausalError> {
    let t: Vec<String> = t.iter().map(|s| s.as_ref().to_string()).collect();
    eci_against_regimes(fam, &t, &[])
}

/// `X ⊥ Σ | T` for a statistic `T` of the data `X`.
pub fn check_sufficiency<S: AsRef<str>>(
    fam: &RegimeFamily,
    x: &[S],
    t: &[S],
    registry: &ReductionRegistry,
) -> Result<bool, CausalError> {
    let x: Vec<String> = x.iter().map(|s| s.as_ref().to_string()).collect();
    let t: Vec<String> = t.iter().map(|s| s.as_ref().to_string()).collect();
    if !t.iter().all(|v| x.contains(v)) && !registry.is_reduction(&t, &x) {
        return Err(CausalError::ReductionMissing { statistic: t, data: x });
    }
    eci_against_regimes(fam, &x, &t)
}

fn numeric(label: &str) -> Result<Rational, CausalError> {
    label.parse().map_err(|_| CausalError::NotNumeric(label.to_string()))
}

fn mean(d: &DiscreteDistribution, y: &str, given: &[(&str, &str)]) -> Result<Rational, CausalError> {
    let mut acc = Rational::zero();
    for (k, p) in d.conditional(&[y], given)? {
        acc = acc + numeric(&k[0])? * p;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AceReport {
    pub ace_interventional: Rational,
    pub ace_observational: Option<Rational>,
    pub transfer_valid: bool,
    /// Both observational treatment arms have positive probability.
    pub positivity: bool,
}

/// Average causal effect of a binary treatment `t` (values `0`, `1`) on a numeric response `y`.
pub fn ace(fam: &RegimeFamily, y: &str, t: &str) -> Result<AceReport, CausalError> {
    let obs = fam.dist_of(OBS)?;
    for (label, value) in [(DO0, "0"), (DO1, "1")] {
        if fam.dist_of(label)?.prob_of(&[(t, value)])? != Rational::one() {
            return Err(CausalError::NotIntervention(label.to_string()));
        }
    }
    let ace_interventional = mean(fam.dist_of(DO1)?, y, &[])? - mean(fam.dist_of(DO0)?, y, &[])?;
    let positivity = obs.prob_of(&[(t, "0")])?.is_positive() && obs.prob_of(&[(t, "1")])?.is_positive();
    let ace_observational = if positivity {
        Some(mean(obs, y, &[(t, "1")])? - mean(obs, y, &[(t, "0")])?)
    } else {
        None
    };
    let transfer_valid = positivity && eci_against_regimes(fam, &[y.to_string()], &[t.to_string()])?;
    Ok(AceReport { ace_interventional, ace_observational, transfer_valid, positivity })
}

/// `Lᵢ ⊥ Σ | (L̄ᵢ₋₁, Āᵢ₋₁)` for every stage, including the response.
pub fn check_simple_stability(fam: &RegimeFamily, ib: &InfoBase) -> Result<bool, CausalError> {
    Ok(first_unstable_stage(fam, ib, false)?.is_none())
}

/// `(Lᵢ, Uᵢ) ⊥ Σ | (L̄ᵢ₋₁, Ūᵢ₋₁, Āᵢ₋₁)` for every stage.
pub fn check_extended_stability(fam: &RegimeFamily, ib: &InfoBase) -> Result<bool, CausalError> {
    Ok(first_unstable_stage(fam, ib, true)?.is_none())
}

fn first_unstable_stage(fam: &RegimeFamily, ib: &InfoBase, extended: bool) -> Result<Option<usize>, CausalError> {
    ib.validate(fam)?;
    let unmeasured = |j: usize| -> Vec<String> {
        if extended {
            ib.unmeasured.get(j).cloned().unwrap_or_default()
        } else {
            Vec::new()
        }
    };
    for i in 1..=ib.observables.len() {
        let mut left = ib.observables[i - 1].clone();
        left.extend(unmeasured(i - 1));
        let mut cond = ib.history_before(i);
        for j in 0..i - 1 {
            cond.extend(unmeasured(j));
        }
        if left.is_empty() {
            continue;
        }
        if !eci_against_regimes(fam, &left, &cond)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Expected `k(Y)` under strategy `strat`, from observational kernels.
///
/// Sums over every trajectory `(l₁, a₁, …, lₙ₊₁)` the product of strategy
/// action probabilities and observational conditionals `P_obs(lᵢ | history)`.
/// `k` is keyed by the response value; a multi-variable response joins its
/// labels with `,`.
pub fn g_formula(
    fam: &RegimeFamily,
    ib: &InfoBase,
    strat: &Strategy,
    k: &BTreeMap<String, Rational>,
) -> Result<Rational, CausalError> {
    if let Some(stage) = first_unstable_stage(fam, ib, false)? {
        return Err(CausalError::StabilityViolated(stage));
    }
    strat.validate(ib)?;
    let obs = fam.dist_of(OBS)?;
    let mut total = Rational::zero();
    let mut frontier: Vec<(BTreeMap<String, String>, Rational)> = vec![(BTreeMap::new(), Rational::one())];
    for i in 1..=ib.observables.len() {
        let group = &ib.observables[i - 1];
        let gpos = obs.positions(group)?;
        let cards: Vec<usize> = gpos.iter().map(|&p| obs.cardinality(p)).collect();
        let mut next = Vec::new();
        for (hist, w) in frontier {
            let given: Vec<(&str, &str)> = hist.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let cond = match obs.conditional(group, &given) {
                Ok(c) => c,
                Err(ModelError::ZeroConditioningEvent) => {
                    return Err(CausalError::PositivityViolated(format!("{hist:?}")));
                }
                Err(e) => return Err(e.into()),
            };
            for vals in assignments(&cards) {
                let labels: Vec<String> = gpos.iter().zip(&vals).map(|(&p, &v)| obs.values(p)[v].clone()).collect();
                let Some(p) = cond.get(&labels).copied() else { continue };
                let mut h = hist.clone();
                for (n, l) in group.iter().zip(&labels) {
                    h.insert(n.clone(), l.clone());
                }
                let w = w * p;
                if i > ib.stages() {
                    let key = labels.join(",");
                    let kv = k.get(&key).ok_or_else(|| CausalError::InvalidStrategy(format!("k has no value for `{key}`")))?;
                    total = total + w * kv;
                    continue;
                }
                for atom in strat.kernel(i - 1, &h)? {
                    if atom.p.is_zero() {
                        continue;
                    }
                    let mut ha = h.clone();
                    for n in &ib.actions[i - 1] {
                        let v = atom.assign.get(n).ok_or_else(|| {
                            CausalError::InvalidStrategy(format!("stage {i} action misses `{n}`"))
                        })?;
                        ha.insert(n.clone(), v.clone());
                    }
                    next.push((ha, w * atom.p));
                }
            }
        }
        frontier = next;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(n: &str) -> (String, Vec<String>) {
        (n.to_string(), vec!["0".into(), "1".into()])
    }

    fn tv(masses: &[u64]) -> DiscreteDistribution {
        DiscreteDistribution::from_weights(vec![bin("T"), bin("Y")], masses).unwrap()
    }

    fn trial(obs: &[u64], d0: &[u64], d1: &[u64]) -> RegimeFamily {
        RegimeFamily::with_identity(
            vec![(DO0.into(), tv(d0)), (DO1.into(), tv(d1)), (OBS.into(), tv(obs))],
            "Sigma",
        )
        .unwrap()
    }

    #[test]
    fn randomized_trial_transfers() {
        // Y | T=0 is 1/4, Y | T=1 is 3/4 in every regime
        let fam = trial(&[3, 1, 1, 3], &[3, 1, 0, 0], &[0, 0, 1, 3]);
        let r = ace(&fam, "Y", "T").unwrap();
        assert!(r.transfer_valid);
        assert_eq!(r.ace_interventional, Rational::new(1, 2));
        assert_eq!(r.ace_observational, Some(r.ace_interventional));
    }

    #[test]
    fn confounded_does_not_transfer() {
        let fam = trial(&[4, 0, 0, 4], &[1, 1, 0, 0], &[0, 0, 1, 1]);
        let r = ace(&fam, "Y", "T").unwrap();
        assert!(!r.transfer_valid);
        assert_eq!(r.ace_interventional, Rational::zero());
        assert_eq!(r.ace_observational, Some(Rational::one()));
    }

    #[test]
    fn intervention_must_be_sharp() {
        let fam = trial(&[1, 1, 1, 1], &[1, 1, 1, 1], &[0, 0, 1, 3]);
        assert_eq!(ace(&fam, "Y", "T"), Err(CausalError::NotIntervention(DO0.into())));
    }

    #[test]
    fn ancillarity_and_sufficiency() {
        let fam = trial(&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]);
        assert!(check_ancillarity(&fam, &["T"]).unwrap());
        let reg = ReductionRegistry::new();
        assert!(check_sufficiency(&fam, &["T", "Y"], &["T"], &reg).unwrap());
        assert!(matches!(
            check_sufficiency(&fam, &["Y"], &["T"], &reg),
            Err(CausalError::ReductionMissing { .. })
        ));
        let moved = trial(&[3, 1, 1, 3], &[3, 1, 0, 0], &[0, 0, 1, 3]);
        assert!(!check_ancillarity(&moved, &["T"]).unwrap());
    }

    #[test]
    fn no_actions_gives_observational_mean() {
        let d = DiscreteDistribution::from_weights(vec![bin("Y")], &[1, 3]).unwrap();
        let fam = RegimeFamily::single(OBS, d);
        let ib = InfoBase::new(vec![vec!["Y".into()]], vec![]);
        let strat = Strategy { regime: "s".into(), stages: vec![] };
        let k = BTreeMap::from([("0".to_string(), Rational::zero()), ("1".to_string(), Rational::one())]);
        assert_eq!(g_formula(&fam, &ib, &strat, &k).unwrap(), Rational::new(3, 4));
    }
}
