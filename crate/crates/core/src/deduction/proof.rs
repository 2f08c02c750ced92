//! Derivation trees, their numbered text form, and an independent replay check.

use std::collections::{BTreeSet, HashMap};

use serde_json::{json, Value};
use thiserror::Error;

use super::engine::Engine;
use super::rules::{Flag, RuleId};
use crate::dsl::parse_statement;
use crate::lattice::{Statement, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    Premise,
    Rule { rule: RuleId, flag: Option<Flag> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub goal: Statement,
    pub step: Step,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn premise(goal: Statement) -> Self {
        Derivation { goal, step: Step::Premise, children: Vec::new() }
    }

    pub fn rule(goal: Statement, rule: RuleId, children: Vec<Derivation>) -> Self {
        Derivation { goal, step: Step::Rule { rule, flag: None }, children }
    }

    /// Number of rule applications in the tree.
    pub fn rule_count(&self) -> usize {
        let own = usize::from(matches!(self.step, Step::Rule { .. }));
        own + self.children.iter().map(Derivation::rule_count).sum::<usize>()
    }

    /// Rules in the order they are applied (children before parents, left to right).
    pub fn rule_sequence(&self) -> Vec<RuleId> {
        let mut out = Vec::new();
        self.walk(&mut |d| {
            if let Step::Rule { rule, .. } = d.step {
                out.push(rule);
            }
        });
        out
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    fn walk(&self, f: &mut impl FnMut(&Derivation)) {
        for c in &self.children {
            c.walk(f);
        }
        f(self);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("`{0}` is cited as a premise but was not given")]
    MissingPremise(String),
    #[error("rule {rule} takes {expected} premises, step cites {found}")]
    Arity { rule: RuleId, expected: usize, found: usize },
    #[error("rule {rule} is not active in this rule set")]
    InactiveRule { rule: RuleId },
    #[error("`{statement}` does not follow by {rule} from the cited steps")]
    NotAConclusion { rule: RuleId, statement: String },
    #[error("flag {0} is not in force")]
    FlagNotInForce(Flag),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("empty proof")]
    Empty,
}

/// Check one step against the engine's own rule application.
fn check_step(
    engine: &Engine,
    goal: &Statement,
    step: Step,
    children: &[Statement],
    premises: &BTreeSet<Statement>,
) -> Result<(), ReplayError> {
    let u = engine.universe();
    match step {
        Step::Premise => {
            if !children.is_empty() || !premises.contains(goal) {
                return Err(ReplayError::MissingPremise(u.render(goal)));
            }
        }
        Step::Rule { rule, flag } => {
            if !engine.rules().active_rules().any(|r| r == rule) {
                return Err(ReplayError::InactiveRule { rule });
            }
            if let Some(f) = flag {
                if !engine.rules().flags.contains(&f) {
                    return Err(ReplayError::FlagNotInForce(f));
                }
            }
            if children.len() != rule.arity() {
                return Err(ReplayError::Arity { rule, expected: rule.arity(), found: children.len() });
            }
            let ok = if rule.arity() == 0 {
                engine.is_axiom_instance(rule, goal)
            } else {
                engine.conclusions(rule, children).contains(goal)
            };
            if !ok {
                return Err(ReplayError::NotAConclusion { rule, statement: u.render(goal) });
            }
        }
    }
    Ok(())
}

/// Replay a derivation tree bottom-up.
pub fn verify_derivation(engine: &Engine, d: &Derivation, premises: &[Statement]) -> Result<(), ReplayError> {
    let premises: BTreeSet<Statement> = premises.iter().copied().collect();
    fn go(engine: &Engine, d: &Derivation, premises: &BTreeSet<Statement>) -> Result<(), ReplayError> {
        for c in &d.children {
            go(engine, c, premises)?;
        }
        let kids: Vec<Statement> = d.children.iter().map(|c| c.goal).collect();
        check_step(engine, &d.goal, d.step, &kids, premises)
    }
    go(engine, d, &premises)
}

fn step_label(step: Step) -> String {
    match step {
        Step::Premise => "premise".to_string(),
        Step::Rule { rule, flag: Some(f) } => format!("{rule} under {f}"),
        Step::Rule { rule, flag: None } => rule.to_string(),
    }
}

/// Numbered step list; each line cites its rule and the lines it uses.
///
/// ```text
/// 1. X _||_ Y | Z [premise]
/// 2. Y _||_ X | Z [P1: 1]
/// ```
pub fn format_proof(d: &Derivation, universe: &Universe) -> String {
    let mut numbers: HashMap<Statement, usize> = HashMap::new();
    let mut lines: Vec<String> = Vec::new();
    fn go(d: &Derivation, u: &Universe, numbers: &mut HashMap<Statement, usize>, lines: &mut Vec<String>) -> usize {
        if let Some(&n) = numbers.get(&d.goal) {
            return n;
        }
        let refs: Vec<String> = d.children.iter().map(|c| go(c, u, numbers, lines).to_string()).collect();
        let n = lines.len() + 1;
        let label = step_label(d.step);
        let cite = if refs.is_empty() { label } else { format!("{label}: {}", refs.join(", ")) };
        lines.push(format!("{n}. {} [{cite}]", u.render(&d.goal)));
        numbers.insert(d.goal, n);
        n
    }
    go(d, universe, &mut numbers, &mut lines);
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Replay a proof in the text form produced by [`format_proof`]; returns its final statement.
pub fn verify_proof_text(engine: &Engine, text: &str, premises: &[Statement]) -> Result<Statement, ReplayError> {
    let premise_set: BTreeSet<Statement> = premises.iter().copied().collect();
    let mut proved: Vec<Statement> = Vec::new();
    for (i, raw) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let line = i + 1;
        let syntax = |message: &str| ReplayError::Syntax { line, message: message.to_string() };
        let (num, rest) = raw.trim().split_once(". ").ok_or_else(|| syntax("expected `N. <statement> [<rule>]`"))?;
        if num.trim().parse::<usize>().ok() != Some(line) {
            return Err(syntax("step numbers must count up from 1"));
        }
        let open = rest.rfind(" [").ok_or_else(|| syntax("missing rule citation"))?;
        let cite = rest[open + 2..].strip_suffix(']').ok_or_else(|| syntax("unterminated citation"))?;
        let goal = parse_statement(&rest[..open], engine.universe()).map_err(|e| syntax(&e.to_string()))?;
        let (label, refs) = match cite.split_once(':') {
            Some((l, r)) => (l.trim(), r.split(',').map(str::trim).collect::<Vec<_>>()),
            None => (cite.trim(), Vec::new()),
        };
        let step = if label == "premise" {
            Step::Premise
        } else {
            let (rule, flag) = match label.split_once(" under ") {
                Some((r, f)) => (r, Some(f.parse::<Flag>().map_err(|e| syntax(&e))?)),
                None => (label, None),
            };
            Step::Rule { rule: rule.parse::<RuleId>().map_err(|e| syntax(&e))?, flag }
        };
        let mut children = Vec::with_capacity(refs.len());
        for r in refs {
            let k: usize = r.parse().map_err(|_| syntax("bad step reference"))?;
            if k == 0 || k >= line {
                return Err(syntax("reference to a step that does not precede this one"));
            }
            children.push(proved[k - 1]);
        }
        check_step(engine, &goal, step, &children, &premise_set)?;
        proved.push(goal);
    }
    proved.last().copied().ok_or(ReplayError::Empty)
}

/// Machine-readable tree: `{"goal", "rule", "flag", "children"}`.
pub fn derivation_to_json(d: &Derivation, universe: &Universe) -> Value {
    let (rule, flag) = match d.step {
        Step::Premise => ("premise".to_string(), Value::Null),
        Step::Rule { rule, flag } => (rule.to_string(), flag.map_or(Value::Null, |f| Value::from(f.as_str()))),
    };
    json!({
        "goal": universe.render(&d.goal),
        "rule": rule,
        "flag": flag,
        "children": d.children.iter().map(|c| derivation_to_json(c, universe)).collect::<Vec<_>>(),
    })
}

pub fn derivation_from_json(v: &Value, universe: &Universe) -> Result<Derivation, ReplayError> {
    let bad = |m: &str| ReplayError::Syntax { line: 0, message: m.to_string() };
    let goal = v.get("goal").and_then(Value::as_str).ok_or_else(|| bad("missing goal"))?;
    let goal = parse_statement(goal, universe).map_err(|e| bad(&e.to_string()))?;
    let rule = v.get("rule").and_then(Value::as_str).ok_or_else(|| bad("missing rule"))?;
    let step = if rule == "premise" {
        Step::Premise
    } else {
        let flag = match v.get("flag").and_then(Value::as_str) {
            Some(f) => Some(f.parse::<Flag>().map_err(|e| bad(&e))?),
            None => None,
        };
        Step::Rule { rule: rule.parse().map_err(|e: String| bad(&e))?, flag }
    };
    let children = match v.get("children") {
        Some(Value::Array(items)) => items.iter().map(|c| derivation_from_json(c, universe)).collect::<Result<_, _>>()?,
        None => Vec::new(),
        Some(_) => return Err(bad("children must be an array")),
    };
    Ok(Derivation { goal, step, children })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{Limits, RuleSet};

    fn setup() -> (Universe, Engine, Statement) {
        let u = Universe::stochastic(&["X", "Y", "Z"]).unwrap();
        let e = Engine::new(u.clone(), RuleSet::separoid_full());
        let p = parse_statement("X _||_ Y | Z", &u).unwrap();
        (u, e, p)
    }

    #[test]
    fn premise_only_proof_is_one_line() {
        let (u, _, p) = setup();
        assert_eq!(format_proof(&Derivation::premise(p), &u), "1. X _||_ Y | Z [premise]\n");
    }

    #[test]
    fn text_and_json_round_trip() {
        let (u, e, p) = setup();
        let goal = parse_statement("X, Z _||_ Y | Z", &u).unwrap();
        let d = e.prove(&goal, &[p], Limits::default()).unwrap().derivation().unwrap().clone();
        verify_derivation(&e, &d, &[p]).unwrap();
        let text = format_proof(&d, &u);
        assert_eq!(verify_proof_text(&e, &text, &[p]).unwrap(), goal);
        let back = derivation_from_json(&derivation_to_json(&d, &u), &u).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_missing_child() {
        let (u, e, p) = setup();
        let sym = parse_statement("Y _||_ X | Z", &u).unwrap();
        let broken = Derivation::rule(sym, RuleId::P1, vec![]);
        assert!(matches!(verify_derivation(&e, &broken, &[p]), Err(ReplayError::Arity { .. })));
        let text = "1. X _||_ Y | Z [premise]\n2. Y _||_ X | Z [P1: 3]\n";
        assert!(matches!(verify_proof_text(&e, text, &[p]), Err(ReplayError::Syntax { line: 2, .. })));
    }

    #[test]
    fn rejects_wrong_rule() {
        let (u, e, p) = setup();
        let text = "1. X _||_ Y | Z [premise]\n2. Y _||_ X | Z [P3: 1]\n";
        assert!(matches!(verify_proof_text(&e, text, &[p]), Err(ReplayError::NotAConclusion { .. })));
        let _ = u;
    }
}
