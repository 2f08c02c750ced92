//! Rule application, forward closure and minimal-proof search.
//!
//! Closure and proof search share one saturation loop. Statements are
//! finalized cheapest first, where the cost of a derived statement is one plus
//! the cost of its premises and given premises cost nothing. This is a
//! generalized Dijkstra search, so the first time the goal is finalized its
//! derivation tree has the fewest rule applications. Ties go to the rule
//! declared first, then to the smallest premises in canonical order.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use thiserror::Error;

use super::proof::{Derivation, Step};
use super::rules::{Flag, RuleId, RuleSet, RuleSetName};
use crate::lattice::{submasks, Statement, Universe, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeductionError {
    #[error("rule {rule} cannot be applied to `{statement}`")]
    GuardViolation { rule: RuleId, statement: String },
    #[error("rule {rule} is not part of rule set {set}")]
    RuleNotInSet { rule: RuleId, set: RuleSetName },
    #[error("rule {0} needs at least one licensing flag")]
    Unlicensed(RuleId),
    #[error("statement `{statement}` is not admissible under rule set {set}")]
    IllFormed { statement: String, set: RuleSetName },
    #[error("limits must be at least 1")]
    InvalidLimits,
}

/// Bounds on the search. Hitting either marks the result as truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_statements: usize,
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_statements: 500_000, max_depth: 64 }
    }
}

impl Limits {
    pub fn new(max_statements: usize, max_depth: usize) -> Result<Self, DeductionError> {
        if max_statements == 0 || max_depth == 0 {
            return Err(DeductionError::InvalidLimits);
        }
        Ok(Limits { max_statements, max_depth })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    pub statements: BTreeSet<Statement>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProofOutcome {
    Proved(Derivation),
    NotDerivable { truncated: bool },
}

impl ProofOutcome {
    pub fn derivation(&self) -> Option<&Derivation> {
        match self {
            ProofOutcome::Proved(d) => Some(d),
            ProofOutcome::NotDerivable { .. } => None,
        }
    }
}

/// Variables a search may instantiate rule schemas over.
#[derive(Debug, Clone)]
struct Scope {
    stoch: u64,
    dec: u64,
    families: Vec<u64>,
}

/// A universe paired with a rule set.
#[derive(Debug, Clone)]
pub struct Engine {
    universe: Universe,
    rules: RuleSet,
}

#[derive(Debug, Clone)]
struct Node {
    cost: u32,
    height: usize,
    rule: Option<RuleId>,
    flag: Option<Flag>,
    premises: Vec<Statement>,
}

type Candidate = Reverse<(u32, usize, Statement, Vec<Statement>, usize, Option<RuleId>)>;

#[derive(Default)]
struct Indexes {
    left_cond: HashMap<(VarSet, VarSet), Vec<Statement>>,
    left_rc: HashMap<(VarSet, VarSet), Vec<Statement>>,
    right_cond: HashMap<(VarSet, VarSet), Vec<Statement>>,
    right_lc: HashMap<(VarSet, VarSet), Vec<Statement>>,
}

impl Engine {
    pub fn new(universe: Universe, rules: RuleSet) -> Self {
        Engine { universe, rules }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    fn full_scope(&self) -> Scope {
        Scope {
            stoch: self.universe.stoch_mask(),
            dec: self.universe.dec_mask(),
            families: self.universe.family_masks().to_vec(),
        }
    }

    fn scope_of<'a>(&self, stmts: impl IntoIterator<Item = &'a Statement>) -> Scope {
        let (mut stoch, mut dec) = (0u64, 0u64);
        for s in stmts {
            stoch |= s.stoch_union();
            dec |= s.dec_union();
        }
        let stoch = self.universe.saturate(stoch);
        let dec = self.universe.saturate(dec);
        let families = self.universe.family_masks().iter().copied().filter(|f| f & !dec == 0).collect();
        Scope { stoch, dec, families }
    }

    fn sat(&self, vs: VarSet) -> VarSet {
        self.universe.saturate_set(vs)
    }

    fn check_admitted(&self, stmt: &Statement) -> Result<(), DeductionError> {
        if self.rules.admits(stmt, &self.universe) {
            Ok(())
        } else {
            Err(DeductionError::IllFormed { statement: self.universe.render(stmt), set: self.rules.name })
        }
    }

    fn check_rule(&self, rule: RuleId) -> Result<(), DeductionError> {
        if self.rules.rank(rule).is_none() {
            return Err(DeductionError::RuleNotInSet { rule, set: self.rules.name });
        }
        if rule.needs_flag() && self.rules.flags.is_empty() {
            return Err(DeductionError::Unlicensed(rule));
        }
        Ok(())
    }

    /// Whether `stmt` is an instance of a premise-free rule.
    pub fn is_axiom_instance(&self, rule: RuleId, stmt: &Statement) -> bool {
        if !self.rules.admits(stmt, &self.universe) || stmt.right != stmt.cond {
            return false;
        }
        match rule {
            RuleId::P2 => true,
            RuleId::P2e => {
                stmt.left.dec == 0 && self.universe.family_masks().contains(&stmt.right.dec)
            }
            RuleId::P2g => true,
            _ => false,
        }
    }

    fn axioms(&self, rule: RuleId, scope: &Scope, out: &mut Vec<Statement>) {
        match rule {
            RuleId::P2 => {
                let mut kinds = Vec::new();
                if self.rules.name == RuleSetName::SeparoidFull {
                    kinds.push(VarSet::new(scope.stoch, 0));
                }
                kinds.push(VarSet::new(0, scope.dec));
                for k in kinds {
                    for x in submasks(k.stoch | k.dec).skip(1) {
                        for y in submasks(k.stoch | k.dec).skip(1) {
                            let (xs, ys) = if k.stoch != 0 {
                                (VarSet::new(x, 0), VarSet::new(y, 0))
                            } else {
                                (VarSet::new(0, x), VarSet::new(0, y))
                            };
                            out.push(Statement::new(xs, ys, ys));
                        }
                    }
                }
            }
            RuleId::P2e => {
                for x in submasks(scope.stoch).skip(1) {
                    for y in submasks(scope.stoch) {
                        for &f in &scope.families {
                            let r = VarSet::new(y, f);
                            out.push(Statement::new(VarSet::new(x, 0), r, r));
                        }
                    }
                }
            }
            RuleId::P2g => {
                for k in submasks(scope.dec) {
                    for th in submasks(scope.dec) {
                        let dec = k | th;
                        if dec != 0 && !scope.families.iter().any(|f| f & !dec == 0) {
                            continue;
                        }
                        for x in submasks(scope.stoch) {
                            for y in submasks(scope.stoch) {
                                let r = VarSet::new(y, th);
                                out.push(Statement::new(VarSet::new(x, k), r, r));
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        out.retain(|s| self.rules.admits(s, &self.universe));
    }

    fn unary(&self, rule: RuleId, s: &Statement, out: &mut Vec<Statement>) {
        let start = out.len();
        let (l, r, c) = (s.left, s.right, s.cond);
        match rule {
            RuleId::P1 | RuleId::P1g => out.push(s.symmetric()),
            RuleId::P1e => {
                if r.dec == 0 && l.dec == 0 {
                    out.push(s.symmetric());
                }
            }
            RuleId::P3 => {
                let sr = self.sat(r);
                for ws in submasks(sr.stoch) {
                    for wd in submasks(sr.dec) {
                        out.push(Statement::new(l, VarSet::new(ws, wd), c));
                    }
                }
            }
            RuleId::P4 => {
                let sr = self.sat(r);
                for ws in submasks(sr.stoch) {
                    for wd in submasks(sr.dec) {
                        out.push(Statement::new(l, r, c.join(VarSet::new(ws, wd))));
                    }
                }
            }
            RuleId::P3e | RuleId::P3g => {
                for w in submasks(self.universe.saturate(r.stoch)) {
                    out.push(Statement::new(l, VarSet::new(w, r.dec), c));
                }
            }
            RuleId::P4e => {
                for w in submasks(self.universe.saturate(r.stoch)) {
                    out.push(Statement::new(l, r, c.join(VarSet::new(w, 0))));
                }
            }
            RuleId::P4g => {
                for w in submasks(self.universe.saturate(r.stoch)) {
                    out.push(Statement::new(l, VarSet::new(r.stoch, 0), c.join(VarSet::new(w, r.dec))));
                }
            }
            RuleId::Split => {
                if r.dec != 0 {
                    out.push(Statement::new(l, VarSet::new(r.stoch, 0), c.join(VarSet::new(0, r.dec))));
                }
            }
            RuleId::P3m => {
                for w in submasks(self.universe.saturate(l.stoch)) {
                    out.push(Statement::new(VarSet::new(w, l.dec), r, c));
                }
            }
            RuleId::P4m => {
                for w in submasks(self.universe.saturate(l.stoch)) {
                    out.push(Statement::new(l, r, c.join(VarSet::new(w, 0))));
                }
            }
            _ => {}
        }
        self.finish(start, s, out);
    }

    fn binary(&self, rule: RuleId, first: &Statement, second: &Statement, out: &mut Vec<Statement>) {
        let start = out.len();
        match rule {
            RuleId::P5 | RuleId::P5e | RuleId::P5g => {
                if first.left != second.left
                    || (rule != RuleId::P5 && second.right.dec != 0)
                    || self.sat(second.cond) != self.sat(first.right.join(first.cond))
                {
                    return;
                }
                out.push(Statement::new(first.left, first.right.join(second.right), first.cond));
            }
            RuleId::P5m => {
                if self.sat(second.right) != self.sat(first.right)
                    || self.sat(second.cond) != self.sat(first.left.join(first.cond))
                {
                    return;
                }
                out.push(Statement::new(first.left.join(second.left), first.right, first.cond));
            }
            _ => {}
        }
        self.finish(start, first, out);
        out.retain(|c| c != second);
    }

    fn finish(&self, start: usize, premise: &Statement, out: &mut Vec<Statement>) {
        let mut i = start;
        while i < out.len() {
            if out[i] == *premise || !self.rules.admits(&out[i], &self.universe) {
                out.swap_remove(i);
            } else {
                i += 1;
            }
        }
    }

    /// Conclusions of one application of `rule` to exactly these premises, in order.
    pub fn conclusions(&self, rule: RuleId, premises: &[Statement]) -> Vec<Statement> {
        let mut out = Vec::new();
        if premises.len() != rule.arity() || !premises.iter().all(|p| self.rules.guard(rule, p, &self.universe)) {
            return out;
        }
        match premises {
            [] => self.axioms(rule, &self.full_scope(), &mut out),
            [s] => self.unary(rule, s, &mut out),
            [a, b] => self.binary(rule, a, b, &mut out),
            _ => {}
        }
        out
    }

    /// All one-step conclusions of `rule` from `known`.
    pub fn apply_rule(&self, rule: RuleId, known: &BTreeSet<Statement>) -> Result<BTreeSet<Statement>, DeductionError> {
        self.check_rule(rule)?;
        for s in known {
            self.check_admitted(s)?;
            if !self.rules.guard(rule, s, &self.universe) {
                return Err(DeductionError::GuardViolation { rule, statement: self.universe.render(s) });
            }
        }
        let mut out = Vec::new();
        match rule.arity() {
            0 => self.axioms(rule, &self.full_scope(), &mut out),
            1 => known.iter().for_each(|s| self.unary(rule, s, &mut out)),
            _ => {
                for a in known {
                    for b in known {
                        self.binary(rule, a, b, &mut out);
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Forward closure of `premises` under the rule set, over the whole universe.
    pub fn closure(&self, premises: &[Statement], lim: Limits) -> Result<ClosureResult, DeductionError> {
        for p in premises {
            self.check_admitted(p)?;
        }
        let scope = self.full_scope();
        let (done, truncated) = self.saturate_from(premises, None, &scope, lim);
        Ok(ClosureResult { statements: done.into_keys().collect(), truncated })
    }

    /// Search for a derivation of `goal` with the fewest rule applications.
    pub fn prove(&self, goal: &Statement, premises: &[Statement], lim: Limits) -> Result<ProofOutcome, DeductionError> {
        self.check_admitted(goal)?;
        for p in premises {
            self.check_admitted(p)?;
        }
        let scope = self.scope_of(premises.iter().chain(std::iter::once(goal)));
        let (done, truncated) = self.saturate_from(premises, Some(goal), &scope, lim);
        if done.contains_key(goal) {
            Ok(ProofOutcome::Proved(build(goal, &done)))
        } else {
            Ok(ProofOutcome::NotDerivable { truncated })
        }
    }

    fn saturate_from(
        &self,
        premises: &[Statement],
        goal: Option<&Statement>,
        scope: &Scope,
        lim: Limits,
    ) -> (HashMap<Statement, Node>, bool) {
        let rules: Vec<(usize, RuleId)> = self.rules.active_rules().map(|r| (self.rules.rank(r).unwrap(), r)).collect();
        let flag = self.rules.licensing_flag();
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();
        let mut best: HashMap<Statement, (u32, usize, Vec<Statement>)> = HashMap::new();
        let mut done: HashMap<Statement, Node> = HashMap::new();
        let mut idx = Indexes::default();
        let mut truncated = false;

        let mut push = |heap: &mut BinaryHeap<Candidate>,
                        done: &HashMap<Statement, Node>,
                        truncated: &mut bool,
                        stmt: Statement,
                        cost: u32,
                        rank: usize,
                        prem: Vec<Statement>,
                        height: usize,
                        rule: Option<RuleId>| {
            if done.contains_key(&stmt) {
                return;
            }
            if height > lim.max_depth {
                *truncated = true;
                return;
            }
            let key = (cost, rank, prem);
            if let Some(b) = best.get(&stmt) {
                if *b <= key {
                    return;
                }
            }
            best.insert(stmt, key.clone());
            heap.push(Reverse((key.0, key.1, stmt, key.2, height, rule)));
        };

        for p in premises {
            push(&mut heap, &done, &mut truncated, *p, 0, 0, Vec::new(), 0, None);
        }
        let mut buf = Vec::new();
        for &(rank, rule) in &rules {
            if rule.arity() == 0 {
                buf.clear();
                self.axioms(rule, scope, &mut buf);
                for s in buf.drain(..) {
                    push(&mut heap, &done, &mut truncated, s, 1, rank, Vec::new(), 1, Some(rule));
                }
            }
        }

        while let Some(Reverse((cost, _, stmt, prem, height, rule))) = heap.pop() {
            if done.contains_key(&stmt) {
                continue;
            }
            if done.len() >= lim.max_statements {
                truncated = true;
                break;
            }
            let node_flag = rule.filter(|r| r.needs_flag()).and(flag);
            done.insert(stmt, Node { cost, height, rule, flag: node_flag, premises: prem });
            if goal == Some(&stmt) {
                break;
            }
            self.index(&mut idx, &stmt);

            for &(rank, r) in &rules {
                if r.arity() == 0 || !self.rules.guard(r, &stmt, &self.universe) {
                    continue;
                }
                buf.clear();
                if r.arity() == 1 {
                    self.unary(r, &stmt, &mut buf);
                    for s in buf.drain(..) {
                        push(&mut heap, &done, &mut truncated, s, cost + 1, rank, vec![stmt], height + 1, Some(r));
                    }
                    continue;
                }
                let mut pairs: Vec<(Statement, Statement)> = Vec::new();
                let (as_first, as_second) = match r {
                    RuleId::P5m => (
                        idx.right_cond.get(&(self.sat(stmt.right), self.sat(stmt.left.join(stmt.cond)))),
                        idx.right_lc.get(&(self.sat(stmt.right), self.sat(stmt.cond))),
                    ),
                    _ => (
                        idx.left_cond.get(&(stmt.left, self.sat(stmt.right.join(stmt.cond)))),
                        idx.left_rc.get(&(stmt.left, self.sat(stmt.cond))),
                    ),
                };
                pairs.extend(as_first.into_iter().flatten().map(|t| (stmt, *t)));
                pairs.extend(as_second.into_iter().flatten().map(|s| (*s, stmt)));
                for (a, b) in pairs {
                    if !self.rules.guard(r, &a, &self.universe) || !self.rules.guard(r, &b, &self.universe) {
                        continue;
                    }
                    let (na, nb) = (&done[&a], &done[&b]);
                    let c = na.cost + nb.cost + 1;
                    let h = na.height.max(nb.height) + 1;
                    buf.clear();
                    self.binary(r, &a, &b, &mut buf);
                    for s in buf.drain(..) {
                        push(&mut heap, &done, &mut truncated, s, c, rank, vec![a, b], h, Some(r));
                    }
                }
            }
        }
        (done, truncated)
    }

    fn index(&self, idx: &mut Indexes, s: &Statement) {
        let has = |r: RuleId| self.rules.active_rules().any(|x| x == r);
        if has(RuleId::P5) || has(RuleId::P5e) || has(RuleId::P5g) {
            idx.left_cond.entry((s.left, self.sat(s.cond))).or_default().push(*s);
            idx.left_rc.entry((s.left, self.sat(s.right.join(s.cond)))).or_default().push(*s);
        }
        if has(RuleId::P5m) {
            idx.right_cond.entry((self.sat(s.right), self.sat(s.cond))).or_default().push(*s);
            idx.right_lc.entry((self.sat(s.right), self.sat(s.left.join(s.cond)))).or_default().push(*s);
        }
    }
}

fn build(goal: &Statement, done: &HashMap<Statement, Node>) -> Derivation {
    let node = &done[goal];
    let step = match node.rule {
        None => Step::Premise,
        Some(rule) => Step::Rule { rule, flag: node.flag },
    };
    Derivation { goal: *goal, step, children: node.premises.iter().map(|p| build(p, done)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_statement, parse_universe};

    fn xyz() -> Universe {
        Universe::stochastic(&["X", "Y", "Z"]).unwrap()
    }

    fn st(u: &Universe, s: &str) -> Statement {
        parse_statement(s, u).unwrap()
    }

    #[test]
    fn p2_instances_from_nothing() {
        let u = Universe::stochastic(&["X", "Y"]).unwrap();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let out = e.apply_rule(RuleId::P2, &BTreeSet::new()).unwrap();
        assert!(out.contains(&st(&u, "X _||_ Y | Y")));
        assert!(out.contains(&st(&u, "Y _||_ X | X")));
        assert!(out.iter().all(|s| s.right == s.cond));
    }

    #[test]
    fn decomposition_by_subsets() {
        let u = parse_universe("stochastic X, Y, W, Z;").unwrap();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let known = BTreeSet::from([st(&u, "X _||_ Y, W | Z")]);
        let out = e.apply_rule(RuleId::P3, &known).unwrap();
        assert!(out.contains(&st(&u, "X _||_ W | Z")));
        assert!(out.contains(&st(&u, "X _||_ Y | Z")));
    }

    #[test]
    fn restricted_symmetry_guard() {
        let u = parse_universe("stochastic X, Y, Z; decision Theta, Phi; complementary {Theta, Phi};").unwrap();
        let e = Engine::new(u.clone(), RuleSet::eci_restricted());
        let known = BTreeSet::from([st(&u, "X _||_ Y, Theta | Z, Phi")]);
        assert!(matches!(e.apply_rule(RuleId::P1e, &known), Err(DeductionError::GuardViolation { .. })));
        assert!(matches!(e.apply_rule(RuleId::P4m, &known), Err(DeductionError::Unlicensed(_))));
    }

    #[test]
    fn closure_contains_worked_example() {
        let u = xyz();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let c = e.closure(&[st(&u, "X _||_ Y | Z")], Limits::default()).unwrap();
        assert!(!c.truncated);
        assert!(c.statements.contains(&st(&u, "X, Z _||_ Y | Z")));
        assert!(c.statements.contains(&st(&u, "X _||_ Y | Y")));
        assert!(!c.statements.contains(&st(&u, "X _||_ Y")));
    }

    #[test]
    fn premise_goal_has_no_steps() {
        let u = xyz();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let p = st(&u, "X _||_ Y | Z");
        let d = e.prove(&p, &[p], Limits::default()).unwrap();
        assert_eq!(d.derivation().unwrap().rule_count(), 0);
    }

    #[test]
    fn marginal_not_derivable() {
        let u = xyz();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let out = e.prove(&st(&u, "X _||_ Y"), &[st(&u, "X _||_ Y | Z")], Limits::default()).unwrap();
        assert_eq!(out, ProofOutcome::NotDerivable { truncated: false });
    }

    #[test]
    fn statement_limit_truncates() {
        let u = xyz();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let c = e.closure(&[st(&u, "X _||_ Y | Z")], Limits::new(10, 64).unwrap()).unwrap();
        assert!(c.truncated);
        assert_eq!(c.statements.len(), 10);
    }
}
