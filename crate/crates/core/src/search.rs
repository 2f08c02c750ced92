//! Random and exhaustive model search: counterexamples to non-derivable
//! implications, and soundness scans of rule sets against the checkers.
//!
//! Every random model is a pure function of the seed and a trial index: the
//! index selects an independent ChaCha stream, so trials can be replayed one
//! at a time.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::deduction::{Engine, Flag, RuleId, RuleSet, RuleSetName};
use crate::dsl::render_named;
use crate::lattice::{submasks, LatticeError, NamedStatement, Statement, Universe, VarKind, VarSet};
use crate::models::{
    check_complementary, check_sci, check_statement, check_vci, dominating_index, partition_meet, sci_positions,
    DecisionMap, DiscreteDistribution, ModelError, ModelFile, RegimeFamily, Split,
};
use crate::rational::Rational;

/// Name of the identity decision variable in generated families.
pub const IDENTITY: &str = "Sigma";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("statement `{0}` does not fit the chosen semantics")]
    SemanticsMismatch(String),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub trials: usize,
    /// Stochastic variables and their number of values.
    pub var_cardinalities: BTreeMap<String, usize>,
    /// Decision variables drawn as random functions on the regimes, besides the identity.
    #[serde(default)]
    pub decision_cardinalities: BTreeMap<String, usize>,
    pub regime_count: usize,
    /// Atom masses are drawn uniformly from `0..=G` and normalized.
    pub probability_grid: u64,
}

impl SearchConfig {
    /// `n` binary stochastic variables with the given names.
    pub fn binary(seed: u64, trials: usize, names: &[&str]) -> Self {
        SearchConfig {
            seed,
            trials,
            var_cardinalities: names.iter().map(|n| (n.to_string(), 2)).collect(),
            decision_cardinalities: BTreeMap::new(),
            regime_count: 1,
            probability_grid: 4,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.probability_grid == 0 {
            return bad("probability grid must be at least 1");
        }
        if self.regime_count == 0 {
            return bad("regime count must be at least 1");
        }
        if self.var_cardinalities.values().chain(self.decision_cardinalities.values()).any(|&c| c == 0) {
            return bad("cardinalities must be at least 1");
        }
        if self.decision_cardinalities.contains_key(IDENTITY) || self.var_cardinalities.contains_key(IDENTITY) {
            return bad("`Sigma` is reserved for the identity decision variable");
        }
        Ok(())
    }

    fn signature(&self) -> Vec<(String, Vec<String>)> {
        self.var_cardinalities.iter().map(|(n, &c)| (n.clone(), (0..c).map(|v| v.to_string()).collect())).collect()
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

fn draw_distribution(cfg: &SearchConfig, rng: &mut ChaCha8Rng) -> DiscreteDistribution {
    let sig = cfg.signature();
    let atoms: usize = sig.iter().map(|(_, v)| v.len()).product();
    loop {
        let masses: Vec<u64> = (0..atoms).map(|_| rng.gen_range(0..=cfg.probability_grid)).collect();
        if masses.iter().any(|&m| m > 0) {
            return DiscreteDistribution::from_weights(sig, &masses).expect("valid random distribution");
        }
    }
}

fn regime_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// Random joint distribution for trial `index`.
pub fn random_distribution(cfg: &SearchConfig, index: u64) -> DiscreteDistribution {
    draw_distribution(cfg, &mut cfg.rng(index))
}

fn draw_decisions(cfg: &SearchConfig, rng: &mut ChaCha8Rng) -> DecisionMap {
    let labels = regime_labels(cfg.regime_count);
    let mut dm = DecisionMap::new(labels.clone());
    dm.insert(IDENTITY, labels).expect("one value per regime");
    for (n, &c) in &cfg.decision_cardinalities {
        let vals = (0..cfg.regime_count).map(|_| rng.gen_range(0..c).to_string()).collect();
        dm.insert(n, vals).expect("one value per regime");
    }
    dm
}

/// Random family for trial `index`: one random distribution per regime,
/// the identity `Sigma`, and random decision variables.
pub fn random_family(cfg: &SearchConfig, index: u64) -> RegimeFamily {
    let mut rng = cfg.rng(index);
    let regimes: Vec<(String, DiscreteDistribution)> =
        regime_labels(cfg.regime_count).into_iter().map(|l| (l, draw_distribution(cfg, &mut rng))).collect();
    let dm = draw_decisions(cfg, &mut rng);
    RegimeFamily::new(regimes, dm).expect("valid random family")
}

/// Random decision map for trial `index`, as a family with no stochastic variables.
pub fn random_decision_family(cfg: &SearchConfig, index: u64) -> RegimeFamily {
    let mut rng = cfg.rng(index);
    let dm = draw_decisions(cfg, &mut rng);
    decision_family(dm)
}

fn decision_family(dm: DecisionMap) -> RegimeFamily {
    let point = DiscreteDistribution::new(Vec::new(), vec![Rational::one()]).expect("point mass");
    let regimes = dm.regimes().iter().map(|l| (l.clone(), point.clone())).collect();
    RegimeFamily::new(regimes, dm).expect("valid decision family")
}

/// Every pmf on the given variables whose masses are multiples of `1/grid`.
pub fn grid_distributions(vars: &[(String, Vec<String>)], grid: u64) -> Vec<DiscreteDistribution> {
    let atoms: usize = vars.iter().map(|(_, v)| v.len()).product();
    let mut out = Vec::new();
    let mut masses = vec![0u64; atoms];
    fn rec(
        i: usize,
        left: u64,
        masses: &mut Vec<u64>,
        vars: &[(String, Vec<String>)],
        out: &mut Vec<DiscreteDistribution>,
    ) {
        if i + 1 == masses.len() {
            masses[i] = left;
            out.push(DiscreteDistribution::from_weights(vars.to_vec(), masses).expect("grid pmf"));
            return;
        }
        for m in 0..=left {
            masses[i] = m;
            rec(i + 1, left - m, masses, vars, out);
        }
    }
    rec(0, grid, &mut masses, vars, &mut out);
    out
}

/// Every family of `regimes` grid distributions, with the identity `Sigma`.
pub fn grid_families(vars: &[(String, Vec<String>)], regimes: usize, grid: u64) -> Vec<RegimeFamily> {
    let dists = grid_distributions(vars, grid);
    let labels = regime_labels(regimes);
    let mut out = Vec::new();
    let total = dists.len().pow(regimes as u32);
    for mut code in 0..total {
        let mut list = Vec::with_capacity(regimes);
        for l in &labels {
            list.push((l.clone(), dists[code % dists.len()].clone()));
            code /= dists.len();
        }
        out.push(RegimeFamily::with_identity(list, IDENTITY).expect("grid family"));
    }
    out
}

/// Which checker evaluates statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Semantics {
    #[serde(rename = "SCI")]
    Sci,
    #[serde(rename = "VCI")]
    Vci,
    #[serde(rename = "ECI")]
    Eci,
}

impl std::str::FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "SCI" => Ok(Semantics::Sci),
            "VCI" => Ok(Semantics::Vci),
            "ECI" => Ok(Semantics::Eci),
            _ => Err(format!("unknown semantics `{s}`")),
        }
    }
}

impl Semantics {
    pub fn as_str(self) -> &'static str {
        match self {
            Semantics::Sci => "SCI",
            Semantics::Vci => "VCI",
            Semantics::Eci => "ECI",
        }
    }
}

/// Evaluate one statement on a model under the given semantics.
pub fn evaluate(fam: &RegimeFamily, stmt: &NamedStatement, semantics: Semantics) -> Result<bool, SearchError> {
    let mismatch = || SearchError::SemanticsMismatch(render_named(stmt));
    let split = Split::of(fam, stmt).map_err(|e| match e {
        ModelError::UnknownVariable(_) => mismatch(),
        other => other.into(),
    })?;
    let has_dec = !(split.k.is_empty() && split.theta.is_empty() && split.phi.is_empty());
    let has_stoch = !(split.x.is_empty() && split.y.is_empty() && split.z.is_empty());
    match semantics {
        Semantics::Sci => {
            if has_dec || fam.len() != 1 {
                return Err(mismatch());
            }
            Ok(check_sci(fam.dist(0), &split.x, &split.y, &split.z)?)
        }
        Semantics::Vci => {
            if has_stoch {
                return Err(mismatch());
            }
            Ok(check_vci(fam.decisions(), &split.k, &split.theta, &split.phi)?)
        }
        Semantics::Eci => Ok(check_statement(fam, stmt)?),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outcome {
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub semantics: Semantics,
    pub trial: usize,
    pub premises: Vec<Outcome>,
    pub goal: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub family: RegimeFamily,
    pub report: CounterexampleReport,
}

impl Counterexample {
    /// Model file with the report attached under `report`.
    pub fn to_model_file(&self) -> ModelFile {
        let mut m = match self.report.semantics {
            Semantics::Sci => ModelFile::from_distribution(self.family.dist(0)),
            _ => ModelFile::from_family(&self.family),
        };
        m.report = Some(serde_json::to_value(&self.report).expect("report serializes"));
        m
    }
}

fn model_for(cfg: &SearchConfig, semantics: Semantics, index: u64) -> RegimeFamily {
    match semantics {
        Semantics::Sci => RegimeFamily::single("obs", random_distribution(cfg, index)),
        Semantics::Vci => random_decision_family(cfg, index),
        Semantics::Eci => random_family(cfg, index),
    }
}

/// First trial whose model satisfies every premise and violates the goal.
///
/// The returned model has been serialized, reloaded, and re-checked.
pub fn search_counterexample(
    premises: &[NamedStatement],
    goal: &NamedStatement,
    cfg: &SearchConfig,
    semantics: Semantics,
) -> Result<Option<Counterexample>, SearchError> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    if semantics == Semantics::Sci {
        cfg.regime_count = 1;
    }
    for trial in 0..cfg.trials {
        let fam = model_for(&cfg, semantics, trial as u64);
        let mut outcomes = Vec::with_capacity(premises.len());
        let mut all = true;
        for p in premises {
            let holds = evaluate(&fam, p, semantics)?;
            outcomes.push(Outcome { statement: render_named(p), holds });
            if !holds {
                all = false;
                break;
            }
        }
        if !all {
            continue;
        }
        if evaluate(&fam, goal, semantics)? {
            continue;
        }
        let cx = Counterexample {
            family: fam,
            report: CounterexampleReport {
                semantics,
                trial,
                premises: outcomes,
                goal: Outcome { statement: render_named(goal), holds: false },
            },
        };
        let reloaded = ModelFile::parse(&cx.to_model_file().to_json())?;
        if !verify_counterexample(&reloaded, premises, goal, semantics)? {
            return Err(SearchError::Model(ModelError::InvalidModel("counterexample did not survive reload".into())));
        }
        return Ok(Some(cx));
    }
    Ok(None)
}

/// Re-check a serialized counterexample: premises true, goal false.
pub fn verify_counterexample(
    model: &ModelFile,
    premises: &[NamedStatement],
    goal: &NamedStatement,
    semantics: Semantics,
) -> Result<bool, SearchError> {
    let fam = model.family()?;
    for p in premises {
        if !evaluate(&fam, p, semantics)? {
            return Ok(false);
        }
    }
    Ok(!evaluate(&fam, goal, semantics)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub rule: String,
    pub premises: Vec<String>,
    pub conclusion: String,
    pub model: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ScanReport {
    pub models: usize,
    /// Rule instances whose premises held, so the conclusion was checked.
    pub instances: u64,
    pub per_rule: BTreeMap<String, u64>,
    pub violations: u64,
    pub first_violation: Option<Violation>,
}

impl ScanReport {
    pub fn is_sound(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, rule: &str, ok: bool, make: impl FnOnce() -> Violation) {
        self.instances += 1;
        *self.per_rule.entry(rule.to_string()).or_default() += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(make());
            }
        }
    }
}

/// Every statement over the universe admitted by the rule set.
fn statement_space(engine: &Engine) -> Vec<Statement> {
    let u = engine.universe();
    let (s, d) = (u.stoch_mask(), u.dec_mask());
    let slots: Vec<VarSet> =
        submasks(s).flat_map(|a| submasks(d).map(move |b| VarSet::new(a, b))).collect();
    let mut out = Vec::new();
    for &l in &slots {
        for &r in &slots {
            for &c in &slots {
                let st = Statement::new(l, r, c);
                if engine.rules().admits(&st, u) {
                    out.push(st);
                }
            }
        }
    }
    out
}

/// Truth values of the admissible statements on one model, in a dense table
/// keyed by the three slot masks.
struct Truth {
    width: usize,
    table: Vec<u8>,
    holding: Vec<Statement>,
}

impl Truth {
    fn new(u: &Universe) -> Self {
        let width = u.len();
        Truth { width, table: vec![0; 1 << (3 * width)], holding: Vec::new() }
    }

    fn key(&self, s: &Statement) -> usize {
        (((s.left.all() << self.width | s.right.all()) << self.width) | s.cond.all()) as usize
    }

    fn insert(&mut self, s: Statement, holds: bool) {
        let k = self.key(&s);
        self.table[k] = if holds { 2 } else { 1 };
        if holds {
            self.holding.push(s);
        }
    }

    fn get(&self, s: &Statement) -> Option<bool> {
        match self.table[self.key(s)] {
            0 => None,
            t => Some(t == 2),
        }
    }

    fn build(u: &Universe, space: &[Statement], mut eval: impl FnMut(&Statement) -> Result<Option<bool>, SearchError>) -> Result<Self, SearchError> {
        let mut t = Truth::new(u);
        for s in space {
            if let Some(h) = eval(s)? {
                t.insert(*s, h);
            }
        }
        Ok(t)
    }
}

/// Check every rule instance whose premises hold on one model.
fn scan_one(
    engine: &Engine,
    truth: &Truth,
    trial: usize,
    report: &mut ScanReport,
    skip: &dyn Fn(RuleId, &[Statement]) -> bool,
    model_json: &dyn Fn() -> serde_json::Value,
) {
    let u = engine.universe();
    let holding = &truth.holding;
    let mut by_left_cond: HashMap<(VarSet, VarSet), Vec<Statement>> = HashMap::new();
    let mut by_right_cond: HashMap<(VarSet, VarSet), Vec<Statement>> = HashMap::new();
    for s in holding {
        by_left_cond.entry((s.left, s.cond)).or_default().push(*s);
        by_right_cond.entry((s.right, s.cond)).or_default().push(*s);
    }
    let check = |rule: RuleId, prem: &[Statement], concl: Statement, report: &mut ScanReport| {
        let Some(ok) = truth.get(&concl) else { return };
        if skip(rule, prem) {
            return;
        }
        report.record(rule.name(), ok, || Violation {
            trial,
            rule: rule.name().to_string(),
            premises: prem.iter().map(|p| u.render(p)).collect(),
            conclusion: u.render(&concl),
            model: model_json(),
        });
    };
    for rule in engine.rules().active_rules() {
        match rule.arity() {
            0 => {
                for c in engine.conclusions(rule, &[]) {
                    check(rule, &[], c, report);
                }
            }
            1 => {
                for s in holding {
                    for c in engine.conclusions(rule, &[*s]) {
                        check(rule, &[*s], c, report);
                    }
                }
            }
            _ => {
                for a in holding {
                    let partners = if rule == RuleId::P5m {
                        by_right_cond.get(&(a.right, a.left.join(a.cond)))
                    } else {
                        by_left_cond.get(&(a.left, a.right.join(a.cond)))
                    };
                    for b in partners.into_iter().flatten() {
                        for c in engine.conclusions(rule, &[*a, *b]) {
                            check(rule, &[*a, *b], c, report);
                        }
                    }
                }
            }
        }
    }
}

/// `z` is a function of `y` on the regimes.
fn functionally_determined(dm: &DecisionMap, z: &[String], y: &[String]) -> bool {
    let mut seen: HashMap<Vec<String>, Vec<String>> = HashMap::new();
    (0..dm.regimes().len()).all(|r| {
        let yv = dm.tuple(y, r).expect("declared");
        let zv = dm.tuple(z, r).expect("declared");
        seen.entry(yv).or_insert_with(|| zv.clone()) == &zv
    })
}

/// Strong-separoid rule on a decision map: if `z ⪯ y`, `w ⪯ y`, `x ⊥ y | z`
/// and `x ⊥ y | w`, then `x ⊥ y | z ∧ w`, the meet computed by partition
/// intersection closure.
fn scan_meet_rule(
    u: &Universe,
    dm: &DecisionMap,
    truth: &Truth,
    trial: usize,
    report: &mut ScanReport,
) {
    let names = |m: u64| u.names_of_mask(m);
    let dec = u.dec_mask();
    for x in submasks(dec).skip(1) {
        for y in submasks(dec).skip(1) {
            let yn = names(y);
            let conds: Vec<u64> = submasks(dec)
                .filter(|&z| {
                    let st = Statement::new(VarSet::new(0, x), VarSet::new(0, y), VarSet::new(0, z));
                    truth.get(&st).unwrap_or(false) && functionally_determined(dm, &names(z), &yn)
                })
                .collect();
            for (i, &z) in conds.iter().enumerate() {
                for &w in &conds[i..] {
                    let joint = |m: u64| -> Vec<String> {
                        (0..dm.regimes().len()).map(|r| dm.tuple(&names(m), r).expect("declared").join(",")).collect()
                    };
                    let meet = partition_meet(&joint(z), &joint(w));
                    let mut with_meet = dm.clone();
                    with_meet.insert("__meet", meet).expect("one value per regime");
                    let ok = check_vci(&with_meet, &names(x), &yn, &["__meet".to_string()]).expect("declared");
                    let render = |c: u64| {
                        u.render(&Statement::new(VarSet::new(0, x), VarSet::new(0, y), VarSet::new(0, c)))
                    };
                    report.record("P6", ok, || Violation {
                        trial,
                        rule: "P6".into(),
                        premises: vec![render(z), render(w)],
                        conclusion: format!("{} _||_ {} | meet({}; {})", names(x).join(", "), yn.join(", "), names(z).join(", "), names(w).join(", ")),
                        model: serde_json::to_value(ModelFile::from_family(&decision_family(dm.clone()))).expect("json"),
                    });
                }
            }
        }
    }
}

fn decision_universe(dm: &DecisionMap) -> Universe {
    let mut u = Universe::new();
    for n in dm.names() {
        u.declare(n, VarKind::Decision).expect("valid decision name");
    }
    u
}

fn vci_truth(engine: &Engine, dm: &DecisionMap) -> Truth {
    let u = engine.universe();
    let eval = |s: &Statement| {
        Ok(Some(check_vci(dm, &u.names_of(s.left), &u.names_of(s.right), &u.names_of(s.cond)).expect("declared")))
    };
    Truth::build(u, &statement_space(engine), eval).expect("decision maps evaluate")
}

/// Scan one decision map against the variation-independence rules and the meet rule.
pub fn scan_decision_map(dm: &DecisionMap, trial: usize, report: &mut ScanReport) {
    let u = decision_universe(dm);
    let engine = Engine::new(u.clone(), RuleSet::vci_strong());
    let truth = vci_truth(&engine, dm);
    let model = || serde_json::to_value(ModelFile::from_family(&decision_family(dm.clone()))).expect("json");
    scan_one(&engine, &truth, trial, report, &|_, _| false, &model);
    scan_meet_rule(&u, dm, &truth, trial, report);
    report.models += 1;
}

/// Every decision map with up to `max_regimes` regimes and `vars` binary variables.
pub fn vci_exhaustive_scan(max_regimes: usize, vars: usize) -> ScanReport {
    let mut report = ScanReport::default();
    let names: Vec<String> = (0..vars).map(|i| format!("D{}", i + 1)).collect();
    let mut trial = 0;
    for n in 1..=max_regimes {
        let labels = regime_labels(n);
        let per_var = 1usize << n;
        for mut code in 0..per_var.pow(vars as u32) {
            let mut dm = DecisionMap::new(labels.clone());
            for name in &names {
                let f = code % per_var;
                code /= per_var;
                dm.insert(name, (0..n).map(|r| ((f >> r) & 1).to_string()).collect()).expect("one value per regime");
            }
            scan_decision_map(&dm, trial, &mut report);
            trial += 1;
        }
    }
    report
}

fn positions(m: u64) -> Vec<usize> {
    crate::lattice::bits(m).collect()
}

/// Scan a rule set against the semantics it is meant to be sound for.
///
/// `SEPAROID_FULL` is checked on random joint distributions, `VCI_STRONG` on
/// random decision maps (the meet rule included), and the extended rule sets
/// on random regime families. With the `dominating_regime` flag, instances of
/// the mirrored weak-union rule are only counted when every value of the
/// premise's conditioning decision variables has a dominating regime.
pub fn axiom_soundness_scan(cfg: &SearchConfig, rs: &RuleSet) -> Result<ScanReport, SearchError> {
    Ok(axiom_soundness_scan_many(cfg, std::slice::from_ref(rs))?.remove(0))
}

type Truths = HashMap<RuleSetName, Truth>;

/// Scan several rule sets on the same models, one report per rule set.
pub fn axiom_soundness_scan_many(cfg: &SearchConfig, sets: &[RuleSet]) -> Result<Vec<ScanReport>, SearchError> {
    cfg.validate()?;
    let mut reports = vec![ScanReport::default(); sets.len()];
    let names: Vec<&str> = cfg.var_cardinalities.keys().map(String::as_str).collect();
    let sci_universe = Universe::stochastic(&names)?;
    for trial in 0..cfg.trials {
        let mut sci: Option<(DiscreteDistribution, Truths)> = None;
        let mut eci: Option<(RegimeFamily, Truths, HashMap<u64, bool>)> = None;
        for (rs, report) in sets.iter().zip(reports.iter_mut()) {
            match rs.name {
                RuleSetName::SeparoidFull => {
                    let engine = Engine::new(sci_universe.clone(), rs.clone());
                    let (d, truths) = sci.get_or_insert_with(|| (random_distribution(cfg, trial as u64), HashMap::new()));
                    if let Entry::Vacant(slot) = truths.entry(rs.name) {
                        let eval = |s: &Statement| {
                            Ok(Some(sci_positions(d, &positions(s.left.stoch), &positions(s.right.stoch), &positions(s.cond.stoch))))
                        };
                        slot.insert(Truth::build(engine.universe(), &statement_space(&engine), eval)?);
                    }
                    let model = || serde_json::to_value(ModelFile::from_distribution(d)).expect("json");
                    scan_one(&engine, &truths[&rs.name], trial, report, &|_, _| false, &model);
                    report.models += 1;
                }
                RuleSetName::VciStrong => {
                    let fam = random_decision_family(cfg, trial as u64);
                    scan_decision_map(fam.decisions(), trial, report);
                }
                RuleSetName::EciRestricted | RuleSetName::General => {
                    let (fam, truths, dominated) = eci
                        .get_or_insert_with(|| (random_family(cfg, trial as u64), HashMap::new(), HashMap::new()));
                    let u = fam.universe();
                    let engine = Engine::new(u.clone(), rs.clone());
                    if let Entry::Vacant(slot) = truths.entry(rs.name) {
                        let eval = |s: &Statement| {
                            if !check_complementary(fam, &u.names_of_mask(s.dec_union())) {
                                return Ok(None);
                            }
                            Ok(Some(check_statement(fam, &u.to_named(s))?))
                        };
                        slot.insert(Truth::build(&u, &statement_space(&engine), eval)?);
                    }
                    let dominating_only = rs.flags.contains(&Flag::DominatingRegime)
                        && !rs.flags.contains(&Flag::DiscreteVariables)
                        && !rs.flags.contains(&Flag::DiscreteRegimeSpace);
                    if dominating_only {
                        for phi in submasks(u.dec_mask()) {
                            dominated.entry(phi).or_insert_with(|| every_group_dominated(fam, &u.names_of_mask(phi)));
                        }
                    }
                    let skip = |rule: RuleId, prem: &[Statement]| {
                        dominating_only && rule.needs_flag() && !prem.iter().all(|p| dominated[&p.cond.dec])
                    };
                    let model = || serde_json::to_value(ModelFile::from_family(fam)).expect("json");
                    scan_one(&engine, &truths[&rs.name], trial, report, &skip, &model);
                    report.models += 1;
                }
            }
        }
    }
    Ok(reports)
}

/// Every value of `phi` picks out regimes among which one dominates.
pub fn every_group_dominated(fam: &RegimeFamily, phi: &[String]) -> bool {
    let mut groups: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for r in 0..fam.len() {
        groups.entry(fam.decisions().tuple(phi, r).expect("declared")).or_default().push(r);
    }
    groups.values().all(|g| dominating_index(fam, g).is_some())
}

/// JSON summary used by the command line.
pub fn scan_summary(report: &ScanReport) -> serde_json::Value {
    json!({
        "models": report.models,
        "instances": report.instances,
        "per_rule": report.per_rule,
        "violations": report.violations,
        "first_violation": report.first_violation,
    })
}
