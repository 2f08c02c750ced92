//! Families of distributions indexed by regimes, and decision variables on them.

use std::collections::{BTreeMap, BTreeSet};

use super::distribution::DiscreteDistribution;
use super::ModelError;
use crate::lattice::{submasks, Universe, VarKind};
use crate::rational::Rational;

/// Name of the regime coordinate added by [`product_space`].
pub const REGIME_COORDINATE: &str = "__regime";

/// Non-stochastic variables: functions from regimes to value labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecisionMap {
    regimes: Vec<String>,
    vars: BTreeMap<String, Vec<String>>,
}

impl DecisionMap {
    pub fn new(regimes: Vec<String>) -> Self {
        DecisionMap { regimes, vars: BTreeMap::new() }
    }

    /// Add a variable given its value at each regime, in regime order.
    pub fn insert(&mut self, name: &str, values: Vec<String>) -> Result<(), ModelError> {
        if values.len() != self.regimes.len() {
            return Err(ModelError::InvalidModel(format!("decision variable `{name}` must have one value per regime")));
        }
        self.vars.insert(name.to_string(), values);
        Ok(())
    }

    pub fn with(mut self, name: &str, values: &[&str]) -> Result<Self, ModelError> {
        self.insert(name, values.iter().map(|s| s.to_string()).collect())?;
        Ok(self)
    }

    pub fn regimes(&self) -> &[String] {
        &self.regimes
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    pub fn values(&self, name: &str) -> Result<&[String], ModelError> {
        self.vars.get(name).map(Vec::as_slice).ok_or_else(|| ModelError::UnknownVariable(name.to_string()))
    }

    /// Joint value of `names` at regime `r`.
    pub fn tuple<S: AsRef<str>>(&self, names: &[S], r: usize) -> Result<Vec<String>, ModelError> {
        names.iter().map(|n| Ok(self.values(n.as_ref())?[r].clone())).collect()
    }

    /// Keep only the listed regime indices.
    pub fn restrict(&self, keep: &[usize]) -> DecisionMap {
        DecisionMap {
            regimes: keep.iter().map(|&i| self.regimes[i].clone()).collect(),
            vars: self.vars.iter().map(|(k, v)| (k.clone(), keep.iter().map(|&i| v[i].clone()).collect())).collect(),
        }
    }
}

/// `{ℙ_σ : σ ∈ 𝒮}` on a shared finite signature, with decision variables on `𝒮`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeFamily {
    dists: Vec<DiscreteDistribution>,
    decisions: DecisionMap,
}

impl RegimeFamily {
    pub fn new(regimes: Vec<(String, DiscreteDistribution)>, decisions: DecisionMap) -> Result<Self, ModelError> {
        if regimes.is_empty() {
            return Err(ModelError::InvalidModel("a family needs at least one regime".into()));
        }
        let labels: Vec<String> = regimes.iter().map(|(l, _)| l.clone()).collect();
        if labels.iter().collect::<BTreeSet<_>>().len() != labels.len() {
            return Err(ModelError::InvalidModel("duplicate regime label".into()));
        }
        if decisions.regimes != labels {
            return Err(ModelError::InvalidModel("decision variables must be defined on the family's regimes".into()));
        }
        let sig = regimes[0].1.signature();
        if regimes.iter().any(|(_, d)| d.signature() != sig) {
            return Err(ModelError::InvalidModel("regimes must share one stochastic signature".into()));
        }
        if let Some(clash) = decisions.names().find(|n| sig.iter().any(|(s, _)| s == n)) {
            return Err(ModelError::InvalidModel(format!("`{clash}` is both stochastic and a decision variable")));
        }
        Ok(RegimeFamily { dists: regimes.into_iter().map(|(_, d)| d).collect(), decisions })
    }

    /// A one-regime family.
    pub fn single(label: &str, dist: DiscreteDistribution) -> Self {
        RegimeFamily { dists: vec![dist], decisions: DecisionMap::new(vec![label.to_string()]) }
    }

    /// Regimes with their labels used as the identity decision variable `name`.
    pub fn with_identity(regimes: Vec<(String, DiscreteDistribution)>, name: &str) -> Result<Self, ModelError> {
        let labels: Vec<String> = regimes.iter().map(|(l, _)| l.clone()).collect();
        let mut dm = DecisionMap::new(labels.clone());
        dm.insert(name, labels)?;
        Self::new(regimes, dm)
    }

    pub fn regimes(&self) -> &[String] {
        &self.decisions.regimes
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    pub fn regime_index(&self, label: &str) -> Result<usize, ModelError> {
        self.regimes().iter().position(|r| r == label).ok_or_else(|| ModelError::UnknownRegime(label.to_string()))
    }

    pub fn dist(&self, r: usize) -> &DiscreteDistribution {
        &self.dists[r]
    }

    pub fn dist_of(&self, label: &str) -> Result<&DiscreteDistribution, ModelError> {
        Ok(&self.dists[self.regime_index(label)?])
    }

    pub fn dists(&self) -> &[DiscreteDistribution] {
        &self.dists
    }

    pub fn decisions(&self) -> &DecisionMap {
        &self.decisions
    }

    pub fn decisions_mut(&mut self) -> &mut DecisionMap {
        &mut self.decisions
    }

    pub fn stochastic_names(&self) -> &[String] {
        self.dists[0].names()
    }

    pub fn kind_of(&self, name: &str) -> Result<VarKind, ModelError> {
        if self.dists[0].position(name).is_some() {
            Ok(VarKind::Stochastic)
        } else if self.decisions.contains(name) {
            Ok(VarKind::Decision)
        } else {
            Err(ModelError::UnknownVariable(name.to_string()))
        }
    }

    /// An injective decision variable, adding one named `name` (or a fresh variant) if none exists.
    pub fn ensure_identity(&mut self, name: &str) -> String {
        let existing: Vec<String> = self.decisions.names().map(str::to_string).collect();
        if let Some(found) = std::iter::once(name.to_string())
            .chain(existing.iter().cloned())
            .find(|n| self.decisions.contains(n) && check_complementary(self, &[n.as_str()]))
        {
            return found;
        }
        let mut fresh = name.to_string();
        while self.kind_of(&fresh).is_ok() {
            fresh.push('_');
        }
        let labels = self.regimes().to_vec();
        self.decisions.insert(&fresh, labels).expect("one value per regime");
        fresh
    }

    /// Universe of the family's variables; every minimal complementary set of
    /// decision variables is declared as a family.
    pub fn universe(&self) -> Universe {
        let mut u = Universe::new();
        for n in self.stochastic_names() {
            u.declare(n, VarKind::Stochastic).expect("valid stochastic name");
        }
        let dec: Vec<String> = self.decisions.names().map(str::to_string).collect();
        for n in &dec {
            u.declare(n, VarKind::Decision).expect("valid decision name");
        }
        if dec.len() <= 12 {
            let mut minimal: Vec<u64> = Vec::new();
            let mut masks: Vec<u64> = submasks((1u64 << dec.len()) - 1).skip(1).collect();
            masks.sort_by_key(|m| (m.count_ones(), *m));
            for m in masks {
                if minimal.iter().any(|f| f & !m == 0) {
                    continue;
                }
                let names: Vec<&str> = (0..dec.len()).filter(|i| m >> i & 1 == 1).map(|i| dec[i].as_str()).collect();
                if check_complementary(self, &names) {
                    minimal.push(m);
                    u.declare_complementary(&names).expect("decision names");
                }
            }
        }
        u
    }
}

/// `σ ↦ (values of names at σ)` is injective on the regimes.
pub fn check_complementary<S: AsRef<str>>(fam: &RegimeFamily, names: &[S]) -> bool {
    let mut seen = BTreeSet::new();
    for r in 0..fam.len() {
        match fam.decisions.tuple(names, r) {
            Ok(t) => {
                if !seen.insert(t) {
                    return false;
                }
            }
            Err(_) => return false,
        }
    }
    true
}

/// `𝒮_z`: regimes in which `Z = z` has positive probability.
pub fn compute_s_z<S: AsRef<str>, T: AsRef<str>>(
    fam: &RegimeFamily,
    z_vars: &[S],
    z: &[T],
) -> Result<Vec<String>, ModelError> {
    let given: Vec<(&str, &str)> = z_vars.iter().map(AsRef::as_ref).zip(z.iter().map(AsRef::as_ref)).collect();
    let mut out = Vec::new();
    for (r, d) in fam.dists.iter().enumerate() {
        if d.prob_of(&given)?.is_positive() {
            out.push(fam.regimes()[r].clone());
        }
    }
    Ok(out)
}

/// A regime whose support contains the support of every regime in `subset`;
/// ties go to the lowest label.
pub fn find_dominating<S: AsRef<str>>(fam: &RegimeFamily, subset: &[S]) -> Result<Option<String>, ModelError> {
    let idx: Vec<usize> = subset.iter().map(|s| fam.regime_index(s.as_ref())).collect::<Result<_, _>>()?;
    Ok(dominating_index(fam, &idx).map(|i| fam.regimes()[i].clone()))
}

pub(crate) fn dominating_index(fam: &RegimeFamily, idx: &[usize]) -> Option<usize> {
    let supports: Vec<BTreeSet<usize>> = idx.iter().map(|&i| fam.dists[i].support().into_iter().collect()).collect();
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| fam.regimes()[idx[a]].cmp(&fam.regimes()[idx[b]]));
    order.into_iter().find(|&c| supports.iter().all(|s| s.is_subset(&supports[c]))).map(|c| idx[c])
}

/// Finest common coarsening of two partitions of the regimes.
///
/// Regimes are joined when either variable gives them the same value; blocks
/// are labelled `"0"`, `"1"`, ... in order of first regime.
pub fn partition_meet(a: &[String], b: &[String]) -> Vec<String> {
    assert_eq!(a.len(), b.len(), "partition_meet needs variables on the same regimes");
    let n = a.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i] == a[j] || b[i] == b[j] {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = labels.len().to_string();
            labels.entry(root).or_insert(next).clone()
        })
        .collect()
}

/// Joint distribution on `Ω × 𝒮` with `P*(ω,σ) = ℙ_σ(ω) π(σ)`.
///
/// The regime index becomes a stochastic coordinate named
/// [`REGIME_COORDINATE`], and every decision variable becomes a stochastic
/// variable determined by it.
pub fn product_space(fam: &RegimeFamily, prior: &BTreeMap<String, Rational>) -> Result<DiscreteDistribution, ModelError> {
    let mut pi = Vec::with_capacity(fam.len());
    for label in fam.regimes() {
        let p = prior.get(label).copied().unwrap_or_else(Rational::zero);
        if !p.is_positive() {
            return Err(ModelError::InvalidPrior(format!("regime `{label}` needs positive prior mass")));
        }
        pi.push(p);
    }
    if let Some(extra) = prior.keys().find(|k| !fam.regimes().contains(k)) {
        return Err(ModelError::InvalidPrior(format!("unknown regime `{extra}`")));
    }
    if pi.iter().sum::<Rational>() != Rational::one() {
        return Err(ModelError::InvalidPrior("prior does not sum to 1".into()));
    }
    if fam.kind_of(REGIME_COORDINATE).is_ok() {
        return Err(ModelError::InvalidModel(format!("`{REGIME_COORDINATE}` is reserved for the regime coordinate")));
    }
    let mut vars = fam.dists[0].signature();
    let dec_names: Vec<String> = fam.decisions.names().map(str::to_string).collect();
    let mut dec_values: Vec<Vec<String>> = Vec::new();
    for n in &dec_names {
        let mut vals: Vec<String> = fam.decisions.values(n)?.to_vec();
        vals.sort();
        vals.dedup();
        vars.push((n.clone(), vals.clone()));
        dec_values.push(vals);
    }
    vars.push((REGIME_COORDINATE.to_string(), fam.regimes().to_vec()));
    let mut entries = Vec::new();
    for (r, d) in fam.dists.iter().enumerate() {
        for i in 0..d.num_atoms() {
            let p = d.pmf()[i];
            if p.is_zero() {
                continue;
            }
            let atom = d.atom(i);
            let mut assign: BTreeMap<String, String> = BTreeMap::new();
            for (v, &k) in atom.iter().enumerate() {
                assign.insert(d.names()[v].clone(), d.values(v)[k].clone());
            }
            for n in &dec_names {
                assign.insert(n.clone(), fam.decisions.values(n)?[r].clone());
            }
            assign.insert(REGIME_COORDINATE.to_string(), fam.regimes()[r].clone());
            entries.push((assign, p * pi[r]));
        }
    }
    DiscreteDistribution::from_entries(vars, entries)
}
