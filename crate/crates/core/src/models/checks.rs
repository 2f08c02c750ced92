//! Exact independence checks on finite models.
//!
//! "Almost surely" becomes "for every context of positive probability": a
//! conditional table is only constrained where its conditioning event has
//! positive mass. Indicator events of full slot assignments are checked, which
//! is enough for finite variables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::distribution::{assignments, DiscreteDistribution};
use super::family::{check_complementary, compute_s_z, DecisionMap, RegimeFamily};
use super::ModelError;
use crate::lattice::{NamedStatement, VarKind};
use crate::rational::{mul, Rational};

/// Value labels of a variable list.
type Labels = Vec<String>;

struct Marg {
    pos: Vec<usize>,
    strides: Vec<usize>,
    w: Vec<i128>,
}

impl Marg {
    fn new(d: &DiscreteDistribution, pos: &[usize]) -> Self {
        let cards: Vec<usize> = pos.iter().map(|&p| d.cardinality(p)).collect();
        let mut strides = vec![1usize; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        Marg { pos: pos.to_vec(), strides, w: d.marginal_weights(pos) }
    }

    fn at(&self, full: &[usize]) -> i128 {
        self.w[self.pos.iter().zip(&self.strides).map(|(&p, s)| full[p] * s).sum::<usize>()]
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn consistent(ap: &[usize], av: &[usize], bp: &[usize], bv: &[usize]) -> bool {
    ap.iter().zip(av).all(|(p, v)| bp.iter().position(|q| q == p).is_none_or(|j| bv[j] == *v))
}

fn place(buf: &mut [usize], pos: &[usize], vals: &[usize]) {
    for (&p, &v) in pos.iter().zip(vals) {
        buf[p] = v;
    }
}

/// Masses of one context: `(P(x,y,z), P(x,z), P(y,z), P(z))` as integer weights.
#[derive(Clone, Copy)]
struct Masses {
    xyz: i128,
    xz: i128,
    yz: i128,
    z: i128,
}

/// Visit every `(z, x, y)` with `P(z) > 0` and `x`, `y` each consistent with
/// `z`; `x` and `y` may disagree on shared variables, giving `P(x,y,z) = 0`.
fn for_each_context(
    d: &DiscreteDistribution,
    xs: &[usize],
    ys: &[usize],
    zs: &[usize],
    mut f: impl FnMut(&[usize], &[usize], &[usize], Masses) -> bool,
) -> bool {
    let m_z = Marg::new(d, zs);
    let m_xz = Marg::new(d, &union(xs, zs));
    let m_yz = Marg::new(d, &union(ys, zs));
    let m_xyz = Marg::new(d, &union(&union(xs, ys), zs));
    let card = |s: &[usize]| s.iter().map(|&p| d.cardinality(p)).collect::<Vec<_>>();
    let (xc, yc, zc) = (card(xs), card(ys), card(zs));
    let n = d.num_vars();
    let (mut bz, mut bxz, mut byz, mut bxyz) = (vec![0; n], vec![0; n], vec![0; n], vec![0; n]);
    for z in assignments(&zc) {
        place(&mut bz, zs, &z);
        let pz = m_z.at(&bz);
        if pz == 0 {
            continue;
        }
        for x in assignments(&xc) {
            if !consistent(xs, &x, zs, &z) {
                continue;
            }
            bxz.copy_from_slice(&bz);
            place(&mut bxz, xs, &x);
            let pxz = m_xz.at(&bxz);
            for y in assignments(&yc) {
                if !consistent(ys, &y, zs, &z) {
                    continue;
                }
                byz.copy_from_slice(&bz);
                place(&mut byz, ys, &y);
                let pyz = m_yz.at(&byz);
                let pxyz = if consistent(ys, &y, xs, &x) {
                    bxyz.copy_from_slice(&bxz);
                    place(&mut bxyz, ys, &y);
                    m_xyz.at(&bxyz)
                } else {
                    0
                };
                if !f(&z, &x, &y, Masses { xyz: pxyz, xz: pxz, yz: pyz, z: pz }) {
                    return false;
                }
            }
        }
    }
    true
}

fn sorted_positions<S: AsRef<str>>(d: &DiscreteDistribution, names: &[S]) -> Result<Vec<usize>, ModelError> {
    let mut p = d.positions(names)?;
    p.sort_unstable();
    p.dedup();
    Ok(p)
}

/// `X ⊥ Y | Z` by factorization: `P(x,y,z) P(z) = P(x,z) P(y,z)` for every `z` with `P(z) > 0`.
pub fn check_sci<S: AsRef<str>>(d: &DiscreteDistribution, x: &[S], y: &[S], z: &[S]) -> Result<bool, ModelError> {
    let (xs, ys, zs) = (sorted_positions(d, x)?, sorted_positions(d, y)?, sorted_positions(d, z)?);
    Ok(sci_positions(d, &xs, &ys, &zs))
}

pub(crate) fn sci_positions(d: &DiscreteDistribution, xs: &[usize], ys: &[usize], zs: &[usize]) -> bool {
    for_each_context(d, xs, ys, zs, |_, _, _, m| mul(m.xyz, m.z) == mul(m.xz, m.yz))
}

/// `X ⊥ Y | Z` by constancy: `P(x | y,z)` does not depend on `y` wherever `P(y,z) > 0`.
pub fn check_sci_constancy<S: AsRef<str>>(
    d: &DiscreteDistribution,
    x: &[S],
    y: &[S],
    z: &[S],
) -> Result<bool, ModelError> {
    let (xs, ys, zs) = (sorted_positions(d, x)?, sorted_positions(d, y)?, sorted_positions(d, z)?);
    let mut reference: HashMap<(Vec<usize>, Vec<usize>), (i128, i128)> = HashMap::new();
    Ok(for_each_context(d, &xs, &ys, &zs, |z, x, _, m| {
        if m.yz == 0 {
            return true;
        }
        let r = *reference.entry((z.to_vec(), x.to_vec())).or_insert((m.xyz, m.yz));
        mul(m.xyz, r.1) == mul(r.0, m.yz)
    }))
}

/// `X ⊥ Y | Z` for decision variables: `R(X | y,z) = R(X | z)` for every attainable `(y,z)`.
pub fn check_vci<S: AsRef<str>>(dm: &DecisionMap, x: &[S], y: &[S], z: &[S]) -> Result<bool, ModelError> {
    let n = dm.regimes().len();
    let mut by_z: BTreeMap<Vec<String>, BTreeSet<Vec<String>>> = BTreeMap::new();
    let mut by_yz: BTreeMap<(Labels, Labels), BTreeSet<Labels>> = BTreeMap::new();
    for r in 0..n {
        let (xv, yv, zv) = (dm.tuple(x, r)?, dm.tuple(y, r)?, dm.tuple(z, r)?);
        by_z.entry(zv.clone()).or_default().insert(xv.clone());
        by_yz.entry((yv, zv)).or_default().insert(xv);
    }
    Ok(by_yz.iter().all(|((_, zv), xs)| by_z[zv] == *xs))
}

/// `R(X | given)`: values of `X` over the regimes matching `given`.
pub fn conditional_image<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
    dm: &DecisionMap,
    x: &[S],
    given: &[(T, U)],
) -> Result<BTreeSet<Vec<String>>, ModelError> {
    let mut out = BTreeSet::new();
    for r in 0..dm.regimes().len() {
        let mut matches = true;
        for (n, v) in given {
            if dm.values(n.as_ref())?[r] != v.as_ref() {
                matches = false;
            }
        }
        if matches {
            out.insert(dm.tuple(x, r)?);
        }
    }
    if out.is_empty() {
        return Err(ModelError::EmptyContext);
    }
    Ok(out)
}

/// Witness values `w_φ(x, z)`, keyed by `(φ, x, z)` value labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WitnessTable {
    pub phi_vars: Vec<String>,
    pub x_vars: Vec<String>,
    pub z_vars: Vec<String>,
    pub entries: BTreeMap<(Labels, Labels, Labels), Rational>,
}

impl WitnessTable {
    pub fn get<S: AsRef<str>>(&self, phi: &[S], x: &[S], z: &[S]) -> Option<Rational> {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
        self.entries.get(&(own(phi), own(x), own(z))).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EciOutcome {
    pub holds: bool,
    pub witness: Option<WitnessTable>,
}

/// Slots of a statement split by kind, checked against a family.
#[derive(Debug, Clone, Default)]
pub(crate) struct Split {
    pub x: Vec<String>,
    pub k: Vec<String>,
    pub y: Vec<String>,
    pub theta: Vec<String>,
    pub z: Vec<String>,
    pub phi: Vec<String>,
}

impl Split {
    pub(crate) fn of(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<Split, ModelError> {
        let mut s = Split::default();
        let put = |names: &[String], sto: &mut Vec<String>, dec: &mut Vec<String>| -> Result<(), ModelError> {
            for n in names {
                match fam.kind_of(n)? {
                    VarKind::Stochastic => sto.push(n.clone()),
                    VarKind::Decision => dec.push(n.clone()),
                }
            }
            sto.sort();
            sto.dedup();
            dec.sort();
            dec.dedup();
            Ok(())
        };
        put(&stmt.left, &mut s.x, &mut s.k)?;
        put(&stmt.right, &mut s.y, &mut s.theta)?;
        put(&stmt.cond, &mut s.z, &mut s.phi)?;
        Ok(s)
    }

    fn decisions(&self) -> Vec<String> {
        let mut d: Vec<String> = self.k.iter().chain(&self.theta).chain(&self.phi).cloned().collect();
        d.sort();
        d.dedup();
        d
    }
}

/// Regime indices grouped by the value of `phi`, groups in first-regime order.
fn phi_groups(fam: &RegimeFamily, phi: &[String]) -> Result<Vec<(Labels, Vec<usize>)>, ModelError> {
    let mut groups: Vec<(Labels, Vec<usize>)> = Vec::new();
    for r in 0..fam.len() {
        let v = fam.decisions().tuple(phi, r)?;
        match groups.iter_mut().find(|(k, _)| *k == v) {
            Some((_, g)) => g.push(r),
            None => groups.push((v, vec![r])),
        }
    }
    Ok(groups)
}

fn prepare(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<Split, ModelError> {
    let s = Split::of(fam, stmt)?;
    if !s.k.is_empty() {
        return Err(ModelError::MalformedStatement(format!(
            "decision variables {:?} on the left need the general check",
            s.k
        )));
    }
    if s.x.is_empty() {
        return Err(ModelError::MalformedStatement("left slot has no stochastic variable".into()));
    }
    let dec = s.decisions();
    if !check_complementary(fam, &dec) {
        return Err(ModelError::NotComplementary(dec));
    }
    Ok(s)
}

type ConstraintKey = (Vec<usize>, Vec<usize>);
type Constraint = (ConstraintKey, (i128, i128));

/// Every `(x, z) → P_σ(x | y, z)` constraint of one regime.
fn regime_constraints(d: &DiscreteDistribution, s: &Split) -> Result<Vec<Constraint>, ModelError> {
    let (xs, ys, zs) = (sorted_positions(d, &s.x)?, sorted_positions(d, &s.y)?, sorted_positions(d, &s.z)?);
    let mut out = Vec::new();
    for_each_context(d, &xs, &ys, &zs, |z, x, _, m| {
        if m.yz > 0 {
            out.push(((x.to_vec(), z.to_vec()), (m.xyz, m.yz)));
        }
        true
    });
    Ok(out)
}

fn labels(d: &DiscreteDistribution, names: &[String], vals: &[usize]) -> Vec<String> {
    let mut pos: Vec<(usize, &String)> = names.iter().map(|n| (d.position(n).unwrap(), n)).collect();
    pos.sort();
    pos.iter().zip(vals).map(|(&(p, _), &v)| d.values(p)[v].clone()).collect()
}

fn sorted_by_position(d: &DiscreteDistribution, names: &[String]) -> Vec<String> {
    let mut v: Vec<(usize, String)> = names.iter().map(|n| (d.position(n).unwrap(), n.clone())).collect();
    v.sort();
    v.into_iter().map(|(_, n)| n).collect()
}

/// `X ⊥ (Y,Θ) | (Z,Φ)`: for each value `φ` a single `w_φ(x,z)` equals
/// `P_σ(X=x | Y=y, Z=z)` in every regime with `Φ = φ` and every `(y,z)` of
/// positive probability there.
pub fn check_eci(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<EciOutcome, ModelError> {
    let s = prepare(fam, stmt)?;
    let d0 = fam.dist(0);
    let mut table = WitnessTable {
        phi_vars: s.phi.clone(),
        x_vars: sorted_by_position(d0, &s.x),
        z_vars: sorted_by_position(d0, &s.z),
        entries: BTreeMap::new(),
    };
    for (phi, group) in phi_groups(fam, &s.phi)? {
        let mut w: BTreeMap<(Vec<usize>, Vec<usize>), (i128, i128)> = BTreeMap::new();
        for &r in &group {
            for (key, (a, b)) in regime_constraints(fam.dist(r), &s)? {
                let (c, e) = *w.entry(key).or_insert((a, b));
                if mul(a, e) != mul(c, b) {
                    return Ok(EciOutcome { holds: false, witness: None });
                }
            }
        }
        for ((x, z), (a, b)) in w {
            let key = (phi.clone(), labels(d0, &s.x, &x), labels(d0, &s.z, &z));
            table.entries.insert(key, Rational::new(a, b));
        }
    }
    Ok(EciOutcome { holds: true, witness: Some(table) })
}

/// Pairwise ECI: every pair of regimes sharing a value of `Φ` (a regime paired
/// with itself included) admits a common witness.
pub fn check_pairwise_eci(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<bool, ModelError> {
    let s = prepare(fam, stmt)?;
    for (_, group) in phi_groups(fam, &s.phi)? {
        let per: Vec<Vec<Constraint>> =
            group.iter().map(|&r| regime_constraints(fam.dist(r), &s)).collect::<Result<_, _>>()?;
        for i in 0..per.len() {
            for j in i..per.len() {
                let mut w: HashMap<&ConstraintKey, (i128, i128)> = HashMap::new();
                let pair = if i == j { vec![&per[i]] } else { vec![&per[i], &per[j]] };
                for list in pair {
                    for (key, (a, b)) in list {
                        let (c, e) = *w.entry(key).or_insert((*a, *b));
                        if mul(*a, e) != mul(c, *b) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// General form `(X,K) ⊥ (Y,Θ) | (Z,Φ)`.
///
/// Holds when `X ⊥ (Y,Θ) | (Z,Φ,K)`, `Y ⊥ K | (Z,Φ,Θ)`, and for every value
/// `z` of `Z`, `Θ ⊥ K | Φ` as variation independence on `𝒮_z`.
pub fn check_eci_general(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<bool, ModelError> {
    let s = Split::of(fam, stmt)?;
    let dec = s.decisions();
    if !check_complementary(fam, &dec) {
        return Err(ModelError::NotComplementary(dec));
    }
    if s.x.is_empty() && s.k.is_empty() {
        return Err(ModelError::MalformedStatement("left slot is empty".into()));
    }
    let cat = |a: &[String], b: &[String]| a.iter().chain(b).cloned().collect::<Vec<_>>();
    if !s.x.is_empty() {
        let first = NamedStatement {
            left: s.x.clone(),
            right: cat(&s.y, &s.theta),
            cond: cat(&cat(&s.z, &s.phi), &s.k),
        };
        if !check_eci(fam, &first)?.holds {
            return Ok(false);
        }
    }
    if !s.y.is_empty() && !s.k.is_empty() {
        let second = NamedStatement { left: s.y.clone(), right: s.k.clone(), cond: cat(&cat(&s.z, &s.phi), &s.theta) };
        if !check_eci(fam, &second)?.holds {
            return Ok(false);
        }
    }
    if !s.theta.is_empty() && !s.k.is_empty() {
        let d0 = fam.dist(0);
        let zpos = sorted_positions(d0, &s.z)?;
        let zn = sorted_by_position(d0, &s.z);
        let cards: Vec<usize> = zpos.iter().map(|&p| d0.cardinality(p)).collect();
        for z in assignments(&cards) {
            let zv: Vec<String> = zpos.iter().zip(&z).map(|(&p, &v)| d0.values(p)[v].clone()).collect();
            let sz = compute_s_z(fam, &zn, &zv)?;
            if sz.is_empty() {
                continue;
            }
            let keep: Vec<usize> = sz.iter().map(|l| fam.regime_index(l)).collect::<Result<_, _>>()?;
            if !check_vci(&fam.decisions().restrict(&keep), &s.theta, &s.k, &s.phi)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Evaluate a statement with the checker its shape calls for.
///
/// Purely stochastic statements on a one-regime family use factorization,
/// purely decision statements use variation independence, decision variables
/// on the left use the general form, and everything else uses ECI.
pub fn check_statement(fam: &RegimeFamily, stmt: &NamedStatement) -> Result<bool, ModelError> {
    let s = Split::of(fam, stmt)?;
    let stoch = !(s.x.is_empty() && s.y.is_empty() && s.z.is_empty());
    let dec = !(s.k.is_empty() && s.theta.is_empty() && s.phi.is_empty());
    if !stoch {
        return check_vci(fam.decisions(), &s.k, &s.theta, &s.phi);
    }
    if !dec && fam.len() == 1 {
        return check_sci(fam.dist(0), &s.x, &s.y, &s.z);
    }
    if !s.k.is_empty() {
        return check_eci_general(fam, stmt);
    }
    Ok(check_eci(fam, stmt)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(n: &str) -> (String, Vec<String>) {
        (n.to_string(), vec!["0".into(), "1".into()])
    }

    fn xor() -> DiscreteDistribution {
        // atoms over (X, Y, W), W = X xor Y
        DiscreteDistribution::from_weights(vec![bin("X"), bin("Y"), bin("W")], &[1, 0, 0, 1, 0, 1, 1, 0]).unwrap()
    }

    fn named(l: &[&str], r: &[&str], c: &[&str]) -> NamedStatement {
        NamedStatement::new(l, r, c)
    }

    #[test]
    fn sci_basics() {
        let d = xor();
        let none: [&str; 0] = [];
        assert!(check_sci(&d, &["X"], &["Y"], &none).unwrap());
        assert!(!check_sci(&d, &["X"], &["Y"], &["W"]).unwrap());
        assert!(check_sci(&d, &["X"], &["Y"], &["Y"]).unwrap());
        assert!(!check_sci(&d, &["X"], &["X"], &none).unwrap());
        assert!(check_sci(&d, &["X", "Y"], &["W"], &["X", "Y"]).unwrap());
        for (x, y, z) in [(&["X"][..], &["W"][..], &["Y"][..]), (&["X"], &["Y", "W"], &[])] {
            assert_eq!(check_sci(&d, x, y, z).unwrap(), check_sci_constancy(&d, x, y, z).unwrap());
        }
    }

    #[test]
    fn vci_rectangles() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let full = DecisionMap::new(s(&["a", "b", "c", "d"]))
            .with("Theta", &["0", "0", "1", "1"])
            .unwrap()
            .with("Phi", &["0", "1", "0", "1"])
            .unwrap();
        let none: [&str; 0] = [];
        assert!(check_vci(&full, &["Theta"], &["Phi"], &none).unwrap());
        assert!(check_vci(&full, &["Theta"], &["Phi"], &["Phi"]).unwrap());
        let partial = DecisionMap::new(s(&["a", "b", "c"]))
            .with("Theta", &["0", "0", "1"])
            .unwrap()
            .with("Phi", &["0", "1", "0"])
            .unwrap();
        assert!(!check_vci(&partial, &["Theta"], &["Phi"], &none).unwrap());
        let img = conditional_image(&partial, &["Theta"], &[("Phi", "1")]).unwrap();
        assert_eq!(img.len(), 1);
        assert_eq!(conditional_image(&partial, &["Theta"], &[("Phi", "7")]), Err(ModelError::EmptyContext));
    }

    fn treatment_family(effective: bool) -> RegimeFamily {
        // atoms over (T, X)
        let x1 = if effective { [1, 3] } else { [1, 1] };
        let d0 = DiscreteDistribution::from_weights(vec![bin("T"), bin("X")], &[1, 1, 0, 0]).unwrap();
        let d1 = DiscreteDistribution::from_weights(vec![bin("T"), bin("X")], &[0, 0, x1[0], x1[1]]).unwrap();
        RegimeFamily::with_identity(vec![("s0".into(), d0), ("s1".into(), d1)], "Sigma").unwrap()
    }

    #[test]
    fn ineffective_treatment() {
        let fam = treatment_family(false);
        let out = check_eci(&fam, &named(&["X"], &["Sigma"], &["T"])).unwrap();
        assert!(out.holds);
        let w = out.witness.unwrap();
        assert_eq!(w.get(&[] as &[&str], &["1"], &["0"]), Some(Rational::new(1, 2)));
        assert!(check_eci(&fam, &named(&["X"], &["Sigma", "T"], &[])).unwrap().holds);
        assert!(check_pairwise_eci(&fam, &named(&["X"], &["Sigma", "T"], &[])).unwrap());
        let eff = treatment_family(true);
        assert!(!check_eci(&eff, &named(&["X"], &["Sigma"], &[])).unwrap().holds);
    }

    #[test]
    fn eci_errors() {
        let fam = treatment_family(false);
        assert!(matches!(check_eci(&fam, &named(&["X"], &["T"], &[])), Err(ModelError::NotComplementary(_))));
        assert!(matches!(
            check_eci(&fam, &named(&["X", "Sigma"], &["T"], &[])),
            Err(ModelError::MalformedStatement(_))
        ));
    }

    #[test]
    fn general_form_with_constant_k() {
        let mut fam = treatment_family(false);
        fam.decisions_mut().insert("K", vec!["0".into(), "0".into()]).unwrap();
        let a = check_eci_general(&fam, &named(&["X", "K"], &["Sigma"], &["T"])).unwrap();
        let b = check_eci(&fam, &named(&["X"], &["Sigma"], &["T"])).unwrap().holds;
        assert_eq!(a, b);
    }
}
