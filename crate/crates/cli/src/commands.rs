use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use eci_core::causal::{ace, g_formula, Strategy};
use eci_core::deduction::{derivation_to_json, format_proof, Engine, Limits, ProofOutcome, RuleSet, RuleSetName};
use eci_core::dsl::{parse_named_statement, parse_session, render_named};
use eci_core::models::{check_statement, product_space, ModelFile, RegimeFamily};
use eci_core::search::{
    axiom_soundness_scan, scan_summary, search_counterexample, vci_exhaustive_scan, ScanReport, SearchConfig,
    Semantics, IDENTITY,
};
use eci_core::{NamedStatement, Rational, Statement, Universe, VarKind};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{Cli, Command, Options};

pub struct Output {
    pub positive: bool,
    pub text: String,
    pub json: Value,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    Ok(ModelFile::parse(&read(path)?)?)
}

/// Universe and premises from `--session`, `--universe` and `--premise`.
///
/// Without any declarations, every name in the premises and in `extra` is
/// declared stochastic.
fn load_session(opts: &Options, extra: &[&str]) -> Result<(Universe, Vec<Statement>), CliError> {
    let mut text = String::new();
    if let Some(path) = &opts.session {
        text.push_str(&read(path)?);
        text.push('\n');
    }
    if let Some(u) = &opts.universe {
        text.push_str(u);
    }
    let session = parse_session(&text)?;
    let mut universe = session.universe;
    let mut premises = session.premises;
    if universe.is_empty() {
        for s in opts.premises.iter().map(String::as_str).chain(extra.iter().copied()) {
            let named = parse_named_statement(s)?;
            for n in named.left.iter().chain(&named.right).chain(&named.cond) {
                if !universe.contains(n) {
                    universe.declare(n, VarKind::Stochastic)?;
                }
            }
        }
    }
    for p in &opts.premises {
        premises.push(eci_core::parse_statement(p, &universe)?);
    }
    Ok((universe, premises))
}

fn rule_set(opts: &Options, stmts: &[Statement]) -> RuleSet {
    let name = opts.rules.unwrap_or_else(|| RuleSet::infer(stmts));
    RuleSet::new(name).with_flags(opts.flags.iter().copied())
}

fn limits(opts: &Options) -> Result<Limits, CliError> {
    Ok(Limits::new(opts.max_stmts, opts.max_steps)?)
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Derive { goal } => derive(opts, goal),
        Command::Close => close(opts),
        Command::Check { model, statement } => check(model, statement),
        Command::SearchCx { goal, semantics, card, regimes, grid, out } => {
            search_cx(opts, goal, *semantics, *card, *regimes, *grid, out.as_deref())
        }
        Command::Product { model, prior } => product(model, prior),
        Command::Ace { model, treatment, response } => ace_cmd(model, treatment, response),
        Command::Gformula { model, strategy, utility } => gformula(model, strategy, utility.as_deref()),
        Command::ScanAxioms { vars, decisions, regimes, grid, exhaustive } => {
            scan(opts, *vars, *decisions, *regimes, *grid, *exhaustive)
        }
    }
}

fn derive(opts: &Options, goal_text: &str) -> Result<Output, CliError> {
    let (u, premises) = load_session(opts, &[goal_text])?;
    let goal = eci_core::parse_statement(goal_text, &u)?;
    let mut all = premises.clone();
    all.push(goal);
    let rs = rule_set(opts, &all);
    let set = rs.name.as_str();
    let engine = Engine::new(u.clone(), rs);
    let goal_str = u.render(&goal);
    match engine.prove(&goal, &premises, limits(opts)?)? {
        ProofOutcome::Proved(d) => {
            let trace = format_proof(&d, &u);
            let sequence: Vec<&str> = d.rule_sequence().iter().map(|r| r.name()).collect();
            Ok(Output {
                positive: true,
                text: format!("derived `{goal_str}` under {set} in {} rule applications\n{trace}", d.rule_count()),
                json: json!({
                    "status": "derived",
                    "goal": goal_str,
                    "rule_set": set,
                    "rule_applications": d.rule_count(),
                    "sequence": sequence,
                    "trace": trace,
                    "proof": derivation_to_json(&d, &u),
                }),
            })
        }
        ProofOutcome::NotDerivable { truncated } => {
            let why = if truncated { "search limits reached" } else { "closure exhausted" };
            Ok(Output {
                positive: false,
                text: format!("`{goal_str}` is not derivable under {set} ({why})\n"),
                json: json!({"status": "not_derivable", "goal": goal_str, "rule_set": set, "truncated": truncated}),
            })
        }
    }
}

fn close(opts: &Options) -> Result<Output, CliError> {
    let (u, premises) = load_session(opts, &[])?;
    let rs = rule_set(opts, &premises);
    let set = rs.name.as_str();
    let engine = Engine::new(u.clone(), rs);
    let result = engine.closure(&premises, limits(opts)?)?;
    let rendered: Vec<String> = result.statements.iter().map(|s| u.render(s)).collect();
    let mut text = format!("{} statements under {set}{}\n", rendered.len(), if result.truncated { " (truncated)" } else { "" });
    for s in &rendered {
        let _ = writeln!(text, "{s}");
    }
    Ok(Output {
        positive: true,
        text,
        json: json!({"rule_set": set, "count": rendered.len(), "truncated": result.truncated, "statements": rendered}),
    })
}

fn family_for(model: &ModelFile, stmt: &NamedStatement) -> Result<RegimeFamily, CliError> {
    let mut fam = model.family()?;
    let mentions = stmt.left.iter().chain(&stmt.right).chain(&stmt.cond).any(|n| n == IDENTITY);
    if mentions && fam.kind_of(IDENTITY).is_err() {
        fam.ensure_identity(IDENTITY);
    }
    Ok(fam)
}

fn check(model: &Path, statement: &str) -> Result<Output, CliError> {
    let m = load_model(model)?;
    let stmt = parse_named_statement(statement)?;
    let fam = family_for(&m, &stmt)?;
    let holds = check_statement(&fam, &stmt)?;
    let s = render_named(&stmt);
    Ok(Output {
        positive: holds,
        text: format!("`{s}` {}\n", if holds { "holds" } else { "does not hold" }),
        json: json!({"statement": s, "holds": holds}),
    })
}

fn infer_semantics(u: &Universe, stmts: &[&NamedStatement]) -> Semantics {
    let names = || stmts.iter().flat_map(|s| s.left.iter().chain(&s.right).chain(&s.cond));
    let is_dec = |n: &String| u.lookup(n).map(|i| u.kind(i) == VarKind::Decision).unwrap_or(false);
    if !names().any(is_dec) {
        Semantics::Sci
    } else if names().all(is_dec) {
        Semantics::Vci
    } else {
        Semantics::Eci
    }
}

fn search_cx(
    opts: &Options,
    goal_text: &str,
    semantics: Option<Semantics>,
    card: usize,
    regimes: usize,
    grid: u64,
    out: Option<&Path>,
) -> Result<Output, CliError> {
    let (u, premises) = load_session(opts, &[goal_text])?;
    let goal = u.to_named(&eci_core::parse_statement(goal_text, &u)?);
    let premises: Vec<NamedStatement> = premises.iter().map(|p| u.to_named(p)).collect();
    let all: Vec<&NamedStatement> = premises.iter().chain(std::iter::once(&goal)).collect();
    let semantics = semantics.unwrap_or_else(|| infer_semantics(&u, &all));
    let mut cfg = SearchConfig {
        seed: opts.seed,
        trials: opts.trials,
        var_cardinalities: BTreeMap::new(),
        decision_cardinalities: BTreeMap::new(),
        regime_count: regimes,
        probability_grid: grid,
    };
    for d in u.declarations() {
        match d.kind {
            VarKind::Stochastic if semantics != Semantics::Vci => {
                cfg.var_cardinalities.insert(d.name, card);
            }
            VarKind::Decision if d.name != IDENTITY => {
                cfg.decision_cardinalities.insert(d.name, 2);
            }
            _ => {}
        }
    }
    let goal_str = render_named(&goal);
    match search_counterexample(&premises, &goal, &cfg, semantics)? {
        Some(cx) => {
            let model = cx.to_model_file();
            let model_json: Value = serde_json::to_value(&model).expect("model serializes");
            if let Some(path) = out {
                write(path, &model.to_json())?;
            }
            let mut text =
                format!("counterexample to `{goal_str}` under {} at trial {}\n", semantics.as_str(), cx.report.trial);
            if out.is_none() {
                text.push_str(&model.to_json());
                text.push('\n');
            }
            Ok(Output {
                positive: false,
                text,
                json: json!({"status": "counterexample", "goal": goal_str, "semantics": semantics.as_str(), "model": model_json}),
            })
        }
        None => Ok(Output {
            positive: true,
            text: format!("no counterexample to `{goal_str}` in {} trials\n", cfg.trials),
            json: json!({"status": "none_found", "goal": goal_str, "semantics": semantics.as_str(), "trials": cfg.trials}),
        }),
    }
}

fn product(model: &Path, prior: &str) -> Result<Output, CliError> {
    let fam = load_model(model)?.family()?;
    let prior_text = if prior.trim_start().starts_with('{') { prior.to_string() } else { read(Path::new(prior))? };
    let prior: BTreeMap<String, Rational> = serde_json::from_str(&prior_text)
        .map_err(|e| CliError::Usage(format!("prior must map regimes to probabilities: {e}")))?;
    let joint = ModelFile::from_distribution(&product_space(&fam, &prior)?);
    Ok(Output {
        positive: true,
        text: format!("{}\n", joint.to_json()),
        json: serde_json::to_value(&joint).expect("model serializes"),
    })
}

fn ace_cmd(model: &Path, treatment: &str, response: &str) -> Result<Output, CliError> {
    let fam = load_model(model)?.family()?;
    let r = ace(&fam, response, treatment)?;
    let obs = r.ace_observational.map_or("undefined (positivity fails)".to_string(), |v| v.to_string());
    let text = format!(
        "interventional ACE: {}\nobservational contrast: {obs}\ntransfer valid: {}\n",
        r.ace_interventional, r.transfer_valid
    );
    Ok(Output { positive: r.transfer_valid, text, json: serde_json::to_value(&r).expect("report serializes") })
}

fn parse_utility(text: &str) -> Result<BTreeMap<String, Rational>, CliError> {
    text.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("utility entry `{kv}` is not `value=number`")))?;
            let v: Rational =
                v.trim().parse().map_err(|_| CliError::Usage(format!("utility `{}` is not a number", v.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn gformula(model: &Path, strategy: &Path, utility: Option<&str>) -> Result<Output, CliError> {
    let m = load_model(model)?;
    let ib = m.info_base.clone().ok_or_else(|| CliError::Usage("model file has no `info_base`".into()))?;
    let fam = m.family()?;
    let strat = Strategy::parse(&read(strategy)?)?;
    let k = match utility {
        Some(text) => parse_utility(text)?,
        None => {
            let [y] = ib.response() else {
                return Err(CliError::Usage("a response of several variables needs --utility".into()));
            };
            let d = fam.dist(0);
            let pos = d.position(y).ok_or_else(|| CliError::Usage(format!("unknown response `{y}`")))?;
            d.values(pos)
                .iter()
                .map(|v| {
                    let x: Rational = v.parse().map_err(|_| {
                        CliError::Causal(eci_core::causal::CausalError::NotNumeric(v.clone()))
                    })?;
                    Ok((v.clone(), x))
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let value = g_formula(&fam, &ib, &strat, &k)?;
    Ok(Output {
        positive: true,
        text: format!("expected utility under `{}`: {value}\n", strat.regime),
        json: json!({"strategy": strat.regime, "value": value}),
    })
}

fn scan_text(name: RuleSetName, r: &ScanReport) -> String {
    let mut text = format!(
        "{}: {} models, {} rule instances checked, {} violations\n",
        name.as_str(),
        r.models,
        r.instances,
        r.violations
    );
    for (rule, n) in &r.per_rule {
        let _ = writeln!(text, "  {rule}: {n}");
    }
    if let Some(v) = &r.first_violation {
        let _ = writeln!(text, "first violation: {} from {:?} gives {}", v.rule, v.premises, v.conclusion);
    }
    text
}

fn scan(
    opts: &Options,
    vars: usize,
    decisions: usize,
    regimes: usize,
    grid: u64,
    exhaustive: bool,
) -> Result<Output, CliError> {
    let rs = RuleSet::new(opts.rules.unwrap_or(RuleSetName::SeparoidFull)).with_flags(opts.flags.iter().copied());
    let report = if exhaustive {
        if rs.name != RuleSetName::VciStrong {
            return Err(CliError::Usage("--exhaustive applies to VCI_STRONG only".into()));
        }
        vci_exhaustive_scan(regimes, decisions)
    } else {
        let letters = ["A", "B", "C", "D", "E", "F", "G", "H"];
        if vars > letters.len() {
            return Err(CliError::Usage(format!("at most {} stochastic variables", letters.len())));
        }
        let mut cfg = SearchConfig::binary(opts.seed, opts.trials, &letters[..vars]);
        cfg.regime_count = regimes;
        cfg.probability_grid = grid;
        cfg.decision_cardinalities = (1..=decisions).map(|i| (format!("D{i}"), 2)).collect();
        axiom_soundness_scan(&cfg, &rs)?
    };
    let mut summary = scan_summary(&report);
    summary["rule_set"] = json!(rs.name.as_str());
    summary["flags"] = json!(rs.flags.iter().map(|f| f.as_str()).collect::<Vec<_>>());
    Ok(Output { positive: report.is_sound(), text: scan_text(rs.name, &report), json: summary })
}
