use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn eci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eci")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn derive_weak_union_example() {
    let o = eci(&["derive", "X,Z _||_ Y | Z", "--premise", "X _||_ Y | Z"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[premise]"));
    assert!(text.trim_end().ends_with("X, Z _||_ Y | Z [P1: 4]"));
}

#[test]
fn derive_from_session_file_as_json() {
    let o = eci(&["--session", &fixture("weak_union.eci"), "--json", "derive", "X, Z _||_ Y | Z"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["status"], "derived");
    assert_eq!(v["rule_set"], "SEPAROID_FULL");
    assert_eq!(v["sequence"].as_array().unwrap().len(), v["rule_applications"].as_u64().unwrap() as usize);
}

#[test]
fn underivable_goal_exits_one() {
    let o = eci(&["derive", "X _||_ Y", "-p", "X _||_ Y | Z", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["status"], "not_derivable");
    assert_eq!(json(&o)["truncated"], false);
}

#[test]
fn json_output_is_stable() {
    let args = ["search-cx", "X _||_ Y", "-p", "X _||_ Y | Z", "--seed", "5", "--json"];
    let (a, b) = (eci(&args), eci(&args));
    assert_eq!(a.status.code(), Some(1));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn counterexample_written_and_rechecked() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cx.json");
    let out_s = out.display().to_string();
    let o = eci(&["search-cx", "X _||_ Y", "-p", "X _||_ Y | Z", "--seed", "1", "--out", &out_s]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(eci(&["check", &out_s, "X _||_ Y | Z"]).status.code(), Some(0));
    assert_eq!(eci(&["check", &out_s, "X _||_ Y"]).status.code(), Some(1));
}

#[test]
fn axiom_goal_has_no_counterexample() {
    let o = eci(&["search-cx", "X _||_ Y | Y", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn trailing_bar_is_a_parse_error() {
    let o = eci(&["--json", "search-cx", "X _||_ Y |", "-p", "X _||_ Y | Z"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["code"], "E_PARSE");
}

#[test]
fn unknown_variable_is_an_input_error() {
    let o = eci(&["--universe", "stochastic X, Y;", "--json", "derive", "X _||_ W"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["code"], "E_UNKNOWN_VARIABLE");
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(eci(&["derive"]).status.code(), Some(2));
    assert_eq!(eci(&["--rules", "NOPE", "close"]).status.code(), Some(2));
}

#[test]
fn ineffective_treatment() {
    let model = fixture("ineffective.json");
    assert_eq!(eci(&["check", &model, "X _||_ Sigma | T"]).status.code(), Some(0));
    let o = eci(&["ace", &model, "--response", "X", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["ace_interventional"], "0");
    assert_eq!(v["ace_observational"], "0");
}

#[test]
fn confounded_contrast_does_not_transfer() {
    let o = eci(&["ace", &fixture("confounded.json"), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["transfer_valid"], false);
    assert_eq!(v["ace_interventional"], "0");
    assert_eq!(v["ace_observational"], "1");
}

#[test]
fn gformula_one_stage() {
    let o = eci(&["gformula", &fixture("one_stage.json"), &fixture("always_treat.json"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    // P(L=0) P(Y=1 | L=0, A=1) + P(L=1) P(Y=1 | L=1, A=1) = 1/2 * 1/2 + 1/2 * 3/4
    assert_eq!(json(&o)["value"], "5/8");
    let o = eci(&["gformula", &fixture("one_stage.json"), &fixture("always_treat.json"), "--utility", "0=1,1=0"]);
    assert!(stdout(&o).contains("3/8"));
}

#[test]
fn product_space_of_family() {
    let o = eci(&["product", &fixture("ineffective.json"), r#"{"obs": "1/2", "do0": "1/4", "do1": "1/4"}"#, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!(v["variables"].get("__regime").is_some());
    let bad = eci(&["product", &fixture("ineffective.json"), r#"{"obs": "1/2"}"#, "--json"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(json(&bad)["error"]["code"], "E_INVALID_PRIOR");
}

#[test]
fn scan_axioms_reports_zero_violations() {
    let o = eci(&["scan-axioms", "--trials", "10", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["violations"], 0);
    let o = eci(&["scan-axioms", "--rules", "VCI_STRONG", "--exhaustive", "--regimes", "3", "--decisions", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("P6"));
    let o = eci(&["scan-axioms", "--rules", "ECI_RESTRICTED", "--flag", "discrete_variables", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("P4''"));
}

#[test]
fn closure_lists_premise() {
    let o = eci(&["close", "-p", "A _||_ B"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "B _||_ A"));
}
