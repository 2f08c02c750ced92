//! Exact joint distributions over finitely many discrete variables.

use std::collections::BTreeMap;

use num_integer::Integer;

use super::ModelError;
use crate::rational::Rational;

/// A joint pmf stored densely in mixed radix, last variable fastest.
///
/// Probabilities are kept both as rationals and as integer weights over a
/// common denominator, so equality tests between ratios of marginals reduce
/// to integer cross-multiplication.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDistribution {
    names: Vec<String>,
    values: Vec<Vec<String>>,
    strides: Vec<usize>,
    pmf: Vec<Rational>,
    weights: Vec<i128>,
}

/// Iterate over every assignment of a list of cardinalities, last position fastest.
pub fn assignments(cards: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let total: usize = cards.iter().product();
    let mut cur = vec![0usize; cards.len()];
    let mut left = total;
    std::iter::from_fn(move || {
        if left == 0 {
            return None;
        }
        left -= 1;
        let out = cur.clone();
        for i in (0..cur.len()).rev() {
            cur[i] += 1;
            if cur[i] < cards[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    })
}

fn strides_of(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * cards[i + 1];
    }
    strides
}

impl DiscreteDistribution {
    /// Build from a dense pmf in mixed-radix order.
    pub fn new(vars: Vec<(String, Vec<String>)>, pmf: Vec<Rational>) -> Result<Self, ModelError> {
        let mut names = Vec::with_capacity(vars.len());
        let mut values = Vec::with_capacity(vars.len());
        for (n, vals) in vars {
            if vals.is_empty() {
                return Err(ModelError::InvalidModel(format!("variable `{n}` has no values")));
            }
            if names.contains(&n) {
                return Err(ModelError::InvalidModel(format!("variable `{n}` declared twice")));
            }
            let mut seen = vals.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != vals.len() {
                return Err(ModelError::InvalidModel(format!("variable `{n}` repeats a value")));
            }
            names.push(n);
            values.push(vals);
        }
        let cards: Vec<usize> = values.iter().map(Vec::len).collect();
        let size: usize = cards.iter().product();
        if pmf.len() != size {
            return Err(ModelError::InvalidModel(format!("expected {size} atoms, got {}", pmf.len())));
        }
        if pmf.iter().any(Rational::is_negative) {
            return Err(ModelError::InvalidModel("negative probability".into()));
        }
        if pmf.iter().sum::<Rational>() != Rational::one() {
            return Err(ModelError::InvalidModel("probabilities do not sum to 1".into()));
        }
        let denom = pmf.iter().fold(1i128, |acc, p| acc.lcm(&p.denom()));
        let weights = pmf.iter().map(|p| p.numer() * (denom / p.denom())).collect();
        Ok(DiscreteDistribution { names, values, strides: strides_of(&cards), pmf, weights })
    }

    /// Build from nonnegative integer masses, normalized by their total.
    pub fn from_weights(vars: Vec<(String, Vec<String>)>, masses: &[u64]) -> Result<Self, ModelError> {
        let total: u64 = masses.iter().sum();
        if total == 0 {
            return Err(ModelError::InvalidModel("all masses are zero".into()));
        }
        let pmf = masses.iter().map(|&m| Rational::new(m as i128, total as i128)).collect();
        Self::new(vars, pmf)
    }

    /// Build from sparse `(assignment, p)` entries; unlisted atoms get zero.
    pub fn from_entries<I>(vars: Vec<(String, Vec<String>)>, entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (BTreeMap<String, String>, Rational)>,
    {
        let cards: Vec<usize> = vars.iter().map(|(_, v)| v.len()).collect();
        let strides = strides_of(&cards);
        let mut pmf = vec![Rational::zero(); cards.iter().product()];
        let mut seen = vec![false; pmf.len()];
        for (assign, p) in entries {
            if assign.len() != vars.len() {
                return Err(ModelError::InvalidModel(format!("assignment {assign:?} does not cover every variable")));
            }
            let mut idx = 0;
            for (i, (n, vals)) in vars.iter().enumerate() {
                let v = assign
                    .get(n)
                    .ok_or_else(|| ModelError::InvalidModel(format!("assignment {assign:?} misses `{n}`")))?;
                let k = vals
                    .iter()
                    .position(|x| x == v)
                    .ok_or_else(|| ModelError::InvalidModel(format!("`{v}` is not a value of `{n}`")))?;
                idx += k * strides[i];
            }
            if seen[idx] {
                return Err(ModelError::InvalidModel(format!("assignment {assign:?} listed twice")));
            }
            seen[idx] = true;
            pmf[idx] = p;
        }
        Self::new(vars, pmf)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self, var: usize) -> &[String] {
        &self.values[var]
    }

    pub fn cardinality(&self, var: usize) -> usize {
        self.values[var].len()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_atoms(&self) -> usize {
        self.pmf.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, ModelError> {
        names
            .iter()
            .map(|n| self.position(n.as_ref()).ok_or_else(|| ModelError::UnknownVariable(n.as_ref().to_string())))
            .collect()
    }

    /// `(name, values)` pairs in declaration order.
    pub fn signature(&self) -> Vec<(String, Vec<String>)> {
        self.names.iter().cloned().zip(self.values.iter().cloned()).collect()
    }

    pub fn pmf(&self) -> &[Rational] {
        &self.pmf
    }

    /// Value indices of an atom.
    pub fn atom(&self, index: usize) -> Vec<usize> {
        self.strides.iter().zip(&self.values).map(|(s, v)| (index / s) % v.len()).collect()
    }

    pub fn index_of(&self, atom: &[usize]) -> usize {
        atom.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn prob(&self, atom: &[usize]) -> Rational {
        self.pmf[self.index_of(atom)]
    }

    /// Indices of atoms with positive mass.
    pub fn support(&self) -> Vec<usize> {
        (0..self.pmf.len()).filter(|&i| self.weights[i] > 0).collect()
    }

    /// Integer weights of the marginal over `vars`, dense, last listed fastest.
    pub(crate) fn marginal_weights(&self, vars: &[usize]) -> Vec<i128> {
        let cards: Vec<usize> = vars.iter().map(|&v| self.values[v].len()).collect();
        let mstrides = strides_of(&cards);
        let mut out = vec![0i128; cards.iter().product()];
        for (i, &w) in self.weights.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let mut idx = 0;
            for (k, &v) in vars.iter().enumerate() {
                idx += ((i / self.strides[v]) % self.values[v].len()) * mstrides[k];
            }
            out[idx] += w;
        }
        out
    }

    /// Exact marginal pmf over `vars`, keyed by value labels.
    pub fn marginal<S: AsRef<str>>(&self, vars: &[S]) -> Result<BTreeMap<Vec<String>, Rational>, ModelError> {
        self.conditional(vars, &[] as &[(&str, &str)])
    }

    /// Probability of a partial assignment given by labels.
    pub fn prob_of<S: AsRef<str>, T: AsRef<str>>(&self, given: &[(S, T)]) -> Result<Rational, ModelError> {
        let fixed = self.resolve(given)?;
        Ok((0..self.pmf.len())
            .filter(|&i| fixed.iter().all(|&(v, k)| (i / self.strides[v]) % self.values[v].len() == k))
            .map(|i| self.pmf[i])
            .sum())
    }

    fn resolve<S: AsRef<str>, T: AsRef<str>>(&self, given: &[(S, T)]) -> Result<Vec<(usize, usize)>, ModelError> {
        given
            .iter()
            .map(|(n, val)| {
                let v = self.position(n.as_ref()).ok_or_else(|| ModelError::UnknownVariable(n.as_ref().to_string()))?;
                let k = self.values[v].iter().position(|x| x == val.as_ref()).ok_or_else(|| {
                    ModelError::InvalidModel(format!("`{}` is not a value of `{}`", val.as_ref(), n.as_ref()))
                })?;
                Ok((v, k))
            })
            .collect()
    }

    /// Exact conditional pmf of `targets` given a partial assignment.
    pub fn conditional<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        &self,
        targets: &[S],
        given: &[(T, U)],
    ) -> Result<BTreeMap<Vec<String>, Rational>, ModelError> {
        let tpos = self.positions(targets)?;
        let fixed = self.resolve(given)?;
        let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut total = Rational::zero();
        for (i, p) in self.pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let atom = self.atom(i);
            if fixed.iter().any(|&(v, k)| atom[v] != k) {
                continue;
            }
            total = total + p;
            let key: Vec<usize> = tpos.iter().map(|&v| atom[v]).collect();
            let e = acc.entry(key).or_insert_with(Rational::zero);
            *e = *e + p;
        }
        if total.is_zero() {
            return Err(ModelError::ZeroConditioningEvent);
        }
        Ok(acc
            .into_iter()
            .map(|(k, p)| (k.iter().zip(&tpos).map(|(&x, &v)| self.values[v][x].clone()).collect(), p / total))
            .collect())
    }

    /// `E[f(atom)]` for a function of the value indices.
    pub fn expectation(&self, f: impl Fn(&[usize]) -> Rational) -> Rational {
        (0..self.pmf.len()).filter(|&i| !self.pmf[i].is_zero()).map(|i| self.pmf[i] * f(&self.atom(i))).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(n: &str) -> (String, Vec<String>) {
        (n.to_string(), vec!["0".into(), "1".into()])
    }

    pub(crate) fn xor_model() -> DiscreteDistribution {
        let mut entries = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                let mut a = BTreeMap::new();
                a.insert("X".to_string(), x.to_string());
                a.insert("Y".to_string(), y.to_string());
                a.insert("W".to_string(), (x ^ y).to_string());
                entries.push((a, Rational::new(1, 4)));
            }
        }
        DiscreteDistribution::from_entries(vec![bin("X"), bin("Y"), bin("W")], entries).unwrap()
    }

    #[test]
    fn assignment_order() {
        let all: Vec<Vec<usize>> = assignments(&[2, 3]).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[3], vec![1, 0]);
        assert_eq!(assignments(&[]).count(), 1);
    }

    #[test]
    fn fair_coins_conditional() {
        let d = DiscreteDistribution::from_weights(vec![bin("X"), bin("Y")], &[1, 1, 1, 1]).unwrap();
        let c = d.conditional(&["X"], &[("Y", "0")]).unwrap();
        assert_eq!(c[&vec!["0".to_string()]], Rational::new(1, 2));
        assert_eq!(c[&vec!["1".to_string()]], Rational::new(1, 2));
    }

    #[test]
    fn xor_conditional() {
        let d = xor_model();
        let c = d.conditional(&["X"], &[("W", "1"), ("Y", "0")]).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&vec!["1".to_string()]], Rational::one());
    }

    #[test]
    fn zero_conditioning_event() {
        let y = ("Y".to_string(), vec!["0".into(), "1".into(), "2".into()]);
        let d = DiscreteDistribution::from_weights(vec![bin("X"), y], &[1, 1, 0, 1, 1, 0]).unwrap();
        assert_eq!(d.conditional(&["X"], &[("Y", "2")]), Err(ModelError::ZeroConditioningEvent));
    }

    #[test]
    fn rejects_bad_pmf() {
        let half = Rational::new(1, 2);
        assert!(DiscreteDistribution::new(vec![bin("X")], vec![half, half, half]).is_err());
        assert!(DiscreteDistribution::new(vec![bin("X")], vec![half, Rational::new(1, 3)]).is_err());
    }

    #[test]
    fn integer_weights_share_denominator() {
        let d = DiscreteDistribution::new(vec![bin("X")], vec![Rational::new(1, 3), Rational::new(2, 3)]).unwrap();
        assert_eq!(d.weights, vec![1, 2]);
        assert_eq!(d.marginal_weights(&[]), vec![3]);
    }
}
