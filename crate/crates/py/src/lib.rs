//! Python bindings. Models and reports cross the boundary as JSON strings.

#[pyo3::pymodule]
mod eci {
    use std::collections::BTreeMap;

    use eci_core::causal;
    use eci_core::deduction::{format_proof, Engine, Flag, Limits, ProofOutcome, RuleSet, RuleSetName};
    use eci_core::dsl::{parse_named_statement, parse_session};
    use eci_core::models::{check_statement, product_space, ModelFile};
    use eci_core::search::{self, SearchConfig, Semantics, IDENTITY};
    use eci_core::{parse_statement, Rational, Statement, Universe, VarKind};
    use pyo3::exceptions::PyValueError;
    use pyo3::prelude::*;

    fn err(e: impl std::fmt::Display) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    /// Declarations from `universe`, or every name in `stmts` as stochastic.
    fn session(universe: Option<&str>, premises: &[String], extra: &[&str]) -> PyResult<(Universe, Vec<Statement>)> {
        let mut u = parse_session(universe.unwrap_or("")).map_err(err)?.universe;
        if u.is_empty() {
            for s in premises.iter().map(String::as_str).chain(extra.iter().copied()) {
                let n = parse_named_statement(s).map_err(err)?;
                for v in n.left.iter().chain(&n.right).chain(&n.cond) {
                    if !u.contains(v) {
                        u.declare(v, VarKind::Stochastic).map_err(err)?;
                    }
                }
            }
        }
        let ps = premises.iter().map(|p| parse_statement(p, &u).map_err(err)).collect::<PyResult<_>>()?;
        Ok((u, ps))
    }

    fn engine(u: &Universe, rules: Option<&str>, flags: &[String], stmts: &[Statement]) -> PyResult<Engine> {
        let name = match rules {
            Some(r) => r.parse::<RuleSetName>().map_err(err)?,
            None => RuleSet::infer(stmts),
        };
        let flags = flags.iter().map(|f| f.parse::<Flag>().map_err(err)).collect::<PyResult<Vec<_>>>()?;
        Ok(Engine::new(u.clone(), RuleSet::new(name).with_flags(flags)))
    }

    /// Proof text for `goal`, or `None` when it is not derivable.
    #[pyfunction]
    #[pyo3(signature = (goal, premises, universe=None, rules=None, flags=Vec::new()))]
    fn derive(
        goal: &str,
        premises: Vec<String>,
        universe: Option<&str>,
        rules: Option<&str>,
        flags: Vec<String>,
    ) -> PyResult<Option<String>> {
        let (u, ps) = session(universe, &premises, &[goal])?;
        let g = parse_statement(goal, &u).map_err(err)?;
        let mut all = ps.clone();
        all.push(g);
        let e = engine(&u, rules, &flags, &all)?;
        match e.prove(&g, &ps, Limits::default()).map_err(err)? {
            ProofOutcome::Proved(d) => Ok(Some(format_proof(&d, &u))),
            ProofOutcome::NotDerivable { .. } => Ok(None),
        }
    }

    /// Every statement derivable from the premises.
    #[pyfunction]
    #[pyo3(signature = (premises, universe=None, rules=None, flags=Vec::new()))]
    fn closure(premises: Vec<String>, universe: Option<&str>, rules: Option<&str>, flags: Vec<String>) -> PyResult<Vec<String>> {
        let (u, ps) = session(universe, &premises, &[])?;
        let e = engine(&u, rules, &flags, &ps)?;
        let r = e.closure(&ps, Limits::default()).map_err(err)?;
        Ok(r.statements.iter().map(|s| u.render(s)).collect())
    }

    /// Whether `statement` holds on the model given as JSON.
    #[pyfunction]
    fn check(model: &str, statement: &str) -> PyResult<bool> {
        let mut fam = ModelFile::parse(model).map_err(err)?.family().map_err(err)?;
        let stmt = parse_named_statement(statement).map_err(err)?;
        if stmt.right.iter().chain(&stmt.left).chain(&stmt.cond).any(|n| n == IDENTITY) && fam.kind_of(IDENTITY).is_err() {
            fam.ensure_identity(IDENTITY);
        }
        check_statement(&fam, &stmt).map_err(err)
    }

    /// Model JSON satisfying the premises and violating the goal, if one is found.
    #[pyfunction]
    #[pyo3(signature = (premises, goal, seed=0, trials=1000, semantics="SCI", universe=None, regimes=2))]
    fn search_counterexample(
        premises: Vec<String>,
        goal: &str,
        seed: u64,
        trials: usize,
        semantics: &str,
        universe: Option<&str>,
        regimes: usize,
    ) -> PyResult<Option<String>> {
        let semantics: Semantics = semantics.parse().map_err(err)?;
        let (u, ps) = session(universe, &premises, &[goal])?;
        let g = u.to_named(&parse_statement(goal, &u).map_err(err)?);
        let ps: Vec<_> = ps.iter().map(|p| u.to_named(p)).collect();
        let mut cfg = SearchConfig::binary(seed, trials, &[]);
        cfg.regime_count = regimes;
        for d in u.declarations() {
            match d.kind {
                VarKind::Stochastic => {
                    cfg.var_cardinalities.insert(d.name, 2);
                }
                VarKind::Decision if d.name != IDENTITY => {
                    cfg.decision_cardinalities.insert(d.name, 2);
                }
                VarKind::Decision => {}
            }
        }
        let cx = search::search_counterexample(&ps, &g, &cfg, semantics).map_err(err)?;
        Ok(cx.map(|c| c.to_model_file().to_json()))
    }

    /// Joint distribution over regimes and variables, as a model JSON.
    #[pyfunction]
    fn product(model: &str, prior: &str) -> PyResult<String> {
        let fam = ModelFile::parse(model).map_err(err)?.family().map_err(err)?;
        let prior: BTreeMap<String, Rational> = serde_json::from_str(prior).map_err(err)?;
        let joint = product_space(&fam, &prior).map_err(err)?;
        Ok(ModelFile::from_distribution(&joint).to_json())
    }

    /// Average causal effect report as JSON.
    #[pyfunction]
    #[pyo3(signature = (model, treatment="T", response="Y"))]
    fn ace(model: &str, treatment: &str, response: &str) -> PyResult<String> {
        let fam = ModelFile::parse(model).map_err(err)?.family().map_err(err)?;
        let r = causal::ace(&fam, response, treatment).map_err(err)?;
        Ok(serde_json::to_string(&r).expect("report serializes"))
    }
}
