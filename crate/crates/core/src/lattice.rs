//! Variable universe, statement representation and the functional-reduction
//! quasiorder.
//!
//! A [`Universe`] assigns every declared variable a bit index. Variable sets
//! are stored as bitmasks, so a [`VarSet`] or [`Statement`] is only meaningful
//! relative to the universe that produced it. Joins are bitwise unions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard ceiling on the number of declared variables (one bit each).
pub const MAX_VARIABLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("reduction `{0} <= {1}` mixes stochastic and decision variables")]
    KindMismatch(String, String),
    #[error("complementary family may only contain decision variables, `{0}` is stochastic")]
    NotDecision(String),
    #[error("empty complementary family")]
    EmptyFamily,
    #[error("universe is limited to {MAX_VARIABLES} variables")]
    TooManyVariables,
    #[error("invalid identifier `{0}`")]
    InvalidName(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Stochastic,
    Decision,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub kind: VarKind,
}

/// A set of variables split by kind. Both masks index the same universe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet {
    pub stoch: u64,
    pub dec: u64,
}

impl VarSet {
    pub const EMPTY: VarSet = VarSet { stoch: 0, dec: 0 };

    pub fn new(stoch: u64, dec: u64) -> Self {
        VarSet { stoch, dec }
    }

    /// Least upper bound: component-wise union.
    pub fn join(self, other: VarSet) -> VarSet {
        VarSet { stoch: self.stoch | other.stoch, dec: self.dec | other.dec }
    }

    pub fn all(self) -> u64 {
        self.stoch | self.dec
    }

    pub fn is_empty(self) -> bool {
        self.all() == 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.stoch & !other.stoch == 0 && self.dec & !other.dec == 0
    }

    pub fn len(self) -> u32 {
        self.all().count_ones()
    }
}

/// `join` as a free function, mirroring the lattice operation.
pub fn join(a: VarSet, b: VarSet) -> VarSet {
    a.join(b)
}

/// A ternary independence assertion `left ⊥ right | cond`.
///
/// Slot equality is set equality; the bitmask encoding makes every value
/// canonical by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub left: VarSet,
    pub right: VarSet,
    pub cond: VarSet,
}

impl Statement {
    pub fn new(left: VarSet, right: VarSet, cond: VarSet) -> Self {
        Statement { left, right, cond }
    }

    pub fn dec_union(&self) -> u64 {
        self.left.dec | self.right.dec | self.cond.dec
    }

    pub fn stoch_union(&self) -> u64 {
        self.left.stoch | self.right.stoch | self.cond.stoch
    }

    pub fn support(&self) -> u64 {
        self.dec_union() | self.stoch_union()
    }

    pub fn is_pure_stochastic(&self) -> bool {
        self.dec_union() == 0
    }

    pub fn is_pure_decision(&self) -> bool {
        self.stoch_union() == 0
    }

    /// Left slot carries decision variables, so only the general definition applies.
    pub fn is_general(&self) -> bool {
        self.left.dec != 0
    }

    pub fn symmetric(&self) -> Statement {
        Statement { left: self.right, right: self.left, cond: self.cond }
    }
}

/// Statement slots as name lists, the form read from user input.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedStatement {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub cond: Vec<String>,
}

impl NamedStatement {
    pub fn new<S: AsRef<str>>(left: &[S], right: &[S], cond: &[S]) -> Self {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect();
        NamedStatement { left: own(left), right: own(right), cond: own(cond) }
    }
}

/// Registered pairs `(w, y)` meaning `w ⪯ y` ("w is a function of y").
///
/// Reflexivity and transitivity are applied on demand.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionRegistry {
    pairs: BTreeSet<(String, String)>,
}

impl ReductionRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, w: impl Into<String>, y: impl Into<String>) {
        self.pairs.insert((w.into(), y.into()));
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(w, y)| (w.as_str(), y.as_str()))
    }

    /// `w ⪯ y` under the reflexive-transitive closure, by breadth-first path search.
    pub fn reduces_to(&self, w: &str, y: &str) -> bool {
        if w == y {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([w]);
        while let Some(cur) = queue.pop_front() {
            for (a, b) in self.pairs() {
                if a == cur && seen.insert(b) {
                    if b == y {
                        return true;
                    }
                    queue.push_back(b);
                }
            }
        }
        false
    }

    /// Every variable of `w` is a member of `y` or reduces to some member of `y`.
    pub fn is_reduction<S: AsRef<str>>(&self, w: &[S], y: &[S]) -> bool {
        w.iter().all(|wv| y.iter().any(|yv| self.reduces_to(wv.as_ref(), yv.as_ref())))
    }
}

/// Declared complementary families of decision variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementarityDecl {
    pub families: Vec<BTreeSet<String>>,
}

/// The declared variables, complementary families and reductions.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    index: HashMap<String, usize>,
    stoch_mask: u64,
    dec_mask: u64,
    complementary: ComplementarityDecl,
    family_masks: Vec<u64>,
    registry: ReductionRegistry,
    // below[i]: mask of variables ⪯ variable i, reflexive and transitive
    below: Vec<u64>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name != "0" && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

impl Universe {
    pub fn new() -> Self {
        Self::default()
    }

    /// Universe with the given stochastic names and nothing else.
    pub fn stochastic<S: AsRef<str>>(names: &[S]) -> Result<Self, LatticeError> {
        let mut u = Universe::new();
        for n in names {
            u.declare(n.as_ref(), VarKind::Stochastic)?;
        }
        Ok(u)
    }

    pub fn declare(&mut self, name: &str, kind: VarKind) -> Result<usize, LatticeError> {
        if !is_identifier(name) {
            return Err(LatticeError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(LatticeError::DuplicateVariable(name.to_string()));
        }
        let i = self.names.len();
        if i >= MAX_VARIABLES {
            return Err(LatticeError::TooManyVariables);
        }
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.index.insert(name.to_string(), i);
        self.below.push(1u64 << i);
        match kind {
            VarKind::Stochastic => self.stoch_mask |= 1 << i,
            VarKind::Decision => self.dec_mask |= 1 << i,
        }
        self.recompute_below();
        Ok(i)
    }

    pub fn declare_complementary<S: AsRef<str>>(&mut self, names: &[S]) -> Result<(), LatticeError> {
        if names.is_empty() {
            return Err(LatticeError::EmptyFamily);
        }
        let mut fam = BTreeSet::new();
        let mut mask = 0u64;
        for n in names {
            let i = self.lookup(n.as_ref())?;
            if self.kinds[i] != VarKind::Decision {
                return Err(LatticeError::NotDecision(n.as_ref().to_string()));
            }
            fam.insert(n.as_ref().to_string());
            mask |= 1 << i;
        }
        if !self.family_masks.contains(&mask) {
            self.complementary.families.push(fam);
            self.family_masks.push(mask);
        }
        Ok(())
    }

    /// Register `w ⪯ y`. Both must be declared and of the same kind.
    pub fn declare_reduction(&mut self, w: &str, y: &str) -> Result<(), LatticeError> {
        let wi = self.lookup(w)?;
        let yi = self.lookup(y)?;
        if self.kinds[wi] != self.kinds[yi] {
            return Err(LatticeError::KindMismatch(w.to_string(), y.to_string()));
        }
        self.registry.insert(w, y);
        self.recompute_below();
        Ok(())
    }

    fn recompute_below(&mut self) {
        let n = self.names.len();
        let mut below: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        for (w, y) in self.registry.pairs() {
            let (wi, yi) = (self.index[w], self.index[y]);
            below[yi] |= 1 << wi;
        }
        // Warshall-style transitive closure over bitmasks
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = below[i];
                for j in bits(below[i]) {
                    acc |= below[j];
                }
                if acc != below[i] {
                    below[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.below = below;
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Result<usize, LatticeError> {
        self.index.get(name).copied().ok_or_else(|| LatticeError::UnknownVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.kinds[i]
    }

    pub fn declarations(&self) -> Vec<VariableDecl> {
        self.names
            .iter()
            .zip(&self.kinds)
            .map(|(n, k)| VariableDecl { name: n.clone(), kind: *k })
            .collect()
    }

    pub fn stoch_mask(&self) -> u64 {
        self.stoch_mask
    }

    pub fn dec_mask(&self) -> u64 {
        self.dec_mask
    }

    pub fn complementarity(&self) -> &ComplementarityDecl {
        &self.complementary
    }

    pub fn family_masks(&self) -> &[u64] {
        &self.family_masks
    }

    pub fn registry(&self) -> &ReductionRegistry {
        &self.registry
    }

    /// Build a variable set from names; kind is taken from the declarations.
    pub fn varset<S: AsRef<str>>(&self, names: &[S]) -> Result<VarSet, LatticeError> {
        let mut vs = VarSet::EMPTY;
        for n in names {
            let i = self.lookup(n.as_ref())?;
            match self.kinds[i] {
                VarKind::Stochastic => vs.stoch |= 1 << i,
                VarKind::Decision => vs.dec |= 1 << i,
            }
        }
        Ok(vs)
    }

    /// Resolve, sort and deduplicate every slot.
    pub fn canonicalize(&self, stmt: &NamedStatement) -> Result<Statement, LatticeError> {
        Ok(Statement {
            left: self.varset(&stmt.left)?,
            right: self.varset(&stmt.right)?,
            cond: self.varset(&stmt.cond)?,
        })
    }

    pub fn statement<S: AsRef<str>>(&self, left: &[S], right: &[S], cond: &[S]) -> Result<Statement, LatticeError> {
        Ok(Statement { left: self.varset(left)?, right: self.varset(right)?, cond: self.varset(cond)? })
    }

    /// Sorted names of a set.
    pub fn names_of(&self, vs: VarSet) -> Vec<String> {
        self.names_of_mask(vs.all())
    }

    pub fn names_of_mask(&self, mask: u64) -> Vec<String> {
        let mut v: Vec<String> = bits(mask).map(|i| self.names[i].clone()).collect();
        v.sort();
        v
    }

    pub fn to_named(&self, stmt: &Statement) -> NamedStatement {
        NamedStatement {
            left: self.names_of(stmt.left),
            right: self.names_of(stmt.right),
            cond: self.names_of(stmt.cond),
        }
    }

    /// Everything reducible to some member of `mask` (including `mask` itself).
    pub fn saturate(&self, mask: u64) -> u64 {
        bits(mask).fold(0, |acc, i| acc | self.below[i])
    }

    pub fn saturate_set(&self, vs: VarSet) -> VarSet {
        VarSet { stoch: self.saturate(vs.stoch), dec: self.saturate(vs.dec) }
    }

    /// `w ⪯ y`: every variable in `w` is in `y` or registered below one of its members.
    pub fn is_reduction(&self, w: VarSet, y: VarSet) -> bool {
        w.is_subset(self.saturate_set(y))
    }

    /// `x ≈ y`: reduction in both directions.
    pub fn equivalent(&self, x: VarSet, y: VarSet) -> bool {
        self.is_reduction(x, y) && self.is_reduction(y, x)
    }

    /// A decision mask is complementary when it contains a declared family.
    pub fn is_complementary_mask(&self, dec: u64) -> bool {
        self.family_masks.iter().any(|f| f & !dec == 0)
    }

    /// Statement legality.
    ///
    /// Decision variables must be absent or contain a declared complementary
    /// family; decision variables on the left are only admitted in general
    /// form. Statements with no stochastic variable at all are variation
    /// statements and carry no complementarity requirement.
    pub fn well_formed(&self, stmt: &Statement, general_form: bool) -> bool {
        if stmt.is_general() && !general_form {
            return false;
        }
        let dec = stmt.dec_union();
        dec == 0 || stmt.is_pure_decision() || self.is_complementary_mask(dec)
    }

    pub fn render_set(&self, vs: VarSet) -> String {
        self.names_of(vs).join(", ")
    }

    /// Render in the statement DSL, e.g. `X, Z _||_ Y | Z`.
    pub fn render(&self, stmt: &Statement) -> String {
        let mut s = format!("{} _||_ {}", self.render_set(stmt.left), self.render_set(stmt.right));
        if !stmt.cond.is_empty() {
            s.push_str(" | ");
            s.push_str(&self.render_set(stmt.cond));
        }
        s
    }

    pub fn display<'a>(&'a self, stmt: &'a Statement) -> DisplayStatement<'a> {
        DisplayStatement { universe: self, stmt }
    }
}

pub struct DisplayStatement<'a> {
    universe: &'a Universe,
    stmt: &'a Statement,
}

impl fmt::Display for DisplayStatement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.universe.render(self.stmt))
    }
}

/// Indices of set bits, ascending.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// All submasks of `mask`, including 0 and `mask`, in ascending order.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut sub = 0u64;
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if cur == mask {
            done = true;
        } else {
            sub = (sub.wrapping_sub(mask)) & mask;
        }
        Some(cur)
    })
}
